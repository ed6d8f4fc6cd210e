#include "mombat/pulsemodel.hpp"

#include <cmath>

namespace mombat {

BasisMatrix build_basis(BasisKind kind, int alpha, int n_samples) {
    if (alpha < 1) throw Error("basis needs at least 1 row");
    if (n_samples <= alpha) throw Error("basis needs more samples than rows");

    BasisMatrix b;
    b.kind = kind;
    b.phi.resize(alpha, n_samples);

    if (kind == BasisKind::Fourier) {
        for (int idx = 0; idx < n_samples; ++idx) {
            const double t = 2.0 * M_PI * idx / static_cast<double>(n_samples);
            for (int row = 1; row <= alpha; ++row) {
                b.phi(row - 1, idx) =
                    (row % 2 == 1) ? std::sin(((row + 1) / 2) * t) : std::cos((row / 2) * t);
            }
        }
        return b;
    }

    for (int idx = 0; idx < n_samples; ++idx) {
        const double t = -1.0 + 2.0 * idx / static_cast<double>(n_samples - 1);
        if (kind == BasisKind::Polynomial) {
            double p = 1.0;
            for (int row = 1; row <= alpha; ++row) {
                p *= t;
                b.phi(row - 1, idx) = p;
            }
        } else {
            double prev = 1.0, cur = t;  // P0, P1
            b.phi(0, idx) = cur;
            for (int deg = 1; deg < alpha; ++deg) {
                const double next = ((2.0 * deg + 1.0) * t * cur - deg * prev) / (deg + 1.0);
                prev = cur;
                cur = next;
                b.phi(deg, idx) = cur;
            }
        }
    }
    return b;
}

Eigen::VectorXd fit_weighted(const PulseSignal& pulse, const BasisMatrix& basis,
                             const QualitySeries& quality, kernels::Exec exec) {
    const Eigen::Index n = pulse.samples.size();
    if (basis.samples() != n) throw Error("basis sampled at a different length than the pulse");
    if (quality.size() != n) throw Error("quality series length differs from the pulse");

    int support = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (quality[i] < 0.0 || quality[i] > 1.0)
            throw Error("quality values must lie in [0, 1]");
        if (quality[i] > 0.0) ++support;
    }
    if (support < basis.alpha()) throw Error("insufficient support");

    const Eigen::VectorXd w = quality.array().square();
    Eigen::MatrixXd g;
    Eigen::VectorXd rhs;
    kernels::weighted_gram(basis.phi, w, pulse.samples, exec, g, rhs);

    const double ridge = 1e-10 * g.trace();
    g.diagonal().array() += ridge;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) throw Error("insufficient support");
    return ldlt.solve(rhs);
}

PulseSignal reconstruct(const Eigen::VectorXd& coeffs, const BasisMatrix& basis, double fps,
                        int window_id) {
    if (coeffs.size() != basis.alpha())
        throw Error("coefficient count differs from basis rows");
    PulseSignal p;
    p.samples = basis.phi.transpose() * coeffs;
    p.fps = fps;
    p.window_id = window_id;
    return p;
}

}  // namespace mombat
