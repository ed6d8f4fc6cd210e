#include "mombat/bss.hpp"

#include <cmath>

namespace mombat {

namespace {

constexpr double kEigenvalueFloor = 1e-10;

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }
};

}  // namespace

WhitenResult whiten(const TemporalSignalSet& s) {
    WhitenResult w;
    for (int r = 0; r < s.rois(); ++r)
        if (s.valid[r]) w.kept_rows.push_back(r);
    if (w.kept_rows.empty()) throw Error("no valid signal rows to whiten");
    const int v = static_cast<int>(w.kept_rows.size());
    const int n = s.samples();
    if (n < 2) throw Error("need at least 2 samples to whiten");

    Eigen::MatrixXd x(v, n);
    for (int i = 0; i < v; ++i) x.row(i) = s.signals.row(w.kept_rows[i]);

    const Eigen::MatrixXd cov = x * x.transpose() / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw Error("whitening eigendecomposition failed");

    const double max_ev = eig.eigenvalues().maxCoeff();
    if (!(max_ev > 0.0)) throw Error("whitening failed: zero covariance");

    // eigenvalues come back ascending, keep descending order
    std::vector<int> kept_dims;
    for (int i = v - 1; i >= 0; --i)
        if (eig.eigenvalues()[i] >= kEigenvalueFloor * max_ev) kept_dims.push_back(i);

    const int d = static_cast<int>(kept_dims.size());
    w.map.resize(d, v);
    for (int i = 0; i < d; ++i)
        w.map.row(i) = eig.eigenvectors().col(kept_dims[i]).transpose() /
                       std::sqrt(eig.eigenvalues()[kept_dims[i]]);
    w.z = w.map * x;
    return w;
}

double kurtosis(const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (n < 4) throw Error("need at least 4 samples for kurtosis");
    const double mean = x.mean();
    const Eigen::ArrayXd c = x.array() - mean;
    const double m2 = c.square().sum() / static_cast<double>(n);
    if (m2 == 0.0) throw Error("kurtosis undefined for zero-variance input");
    const double m4 = c.square().square().sum() / static_cast<double>(n);
    return m4 / (m2 * m2) - 3.0;
}

namespace {

constexpr int kQuasiRestarts = 8;
constexpr int kMaxIterations = 200;
constexpr double kConvergenceTol = 1e-9;

std::vector<Eigen::VectorXd> restart_vectors(int d) {
    std::vector<Eigen::VectorXd> starts;
    SplitMix64 rng{0x6d6f6d626174ull};
    for (int r = 0; r < kQuasiRestarts; ++r) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = rng.normal();
        const double norm = v.norm();
        if (norm > 0.0) v /= norm;
        else v = Eigen::VectorXd::Unit(d, 0);
        starts.push_back(v);
    }
    for (int i = 0; i < d; ++i) starts.push_back(Eigen::VectorXd::Unit(d, i));
    return starts;
}

double objective(const Eigen::MatrixXd& z, const Eigen::VectorXd& w) {
    const Eigen::VectorXd proj = z.transpose() * w;
    return kurtosis(proj);
}

}  // namespace

PulseExtraction extract_pulse(const TemporalSignalSet& s) {
    const WhitenResult white = whiten(s);
    const Eigen::MatrixXd& z = white.z;
    const int d = static_cast<int>(z.rows());
    const double n = static_cast<double>(z.cols());

    Eigen::VectorXd best_w;
    double best_abs = -1.0;
    for (const Eigen::VectorXd& start : restart_vectors(d)) {
        Eigen::VectorXd cand = start;
        double cand_abs = std::abs(objective(z, start));

        Eigen::VectorXd w = start;
        for (int it = 0; it < kMaxIterations; ++it) {
            const Eigen::ArrayXd proj = (z.transpose() * w).array();
            Eigen::VectorXd next = z * proj.cube().matrix() / n - 3.0 * w;
            const double norm = next.norm();
            if (!(norm > 0.0) || !std::isfinite(norm)) break;
            next /= norm;
            const bool converged = std::abs(next.dot(w)) > 1.0 - kConvergenceTol;
            w = next;
            if (converged) break;
        }
        const double iter_abs = std::abs(objective(z, w));
        if (std::isfinite(iter_abs) && iter_abs > cand_abs) {
            cand = w;
            cand_abs = iter_abs;
        }
        if (std::isfinite(cand_abs) && cand_abs > best_abs) {
            best_abs = cand_abs;
            best_w = cand;
        }
    }

    PulseExtraction out;
    if (best_abs < 1e-12) {
        // flat objective, fall back to the leading principal direction
        best_w = Eigen::VectorXd::Unit(d, 0);
        out.unmixing.fallback = true;
    }

    Eigen::VectorXd pulse = z.transpose() * best_w;
    Eigen::Index peak = 0;
    pulse.cwiseAbs().maxCoeff(&peak);
    if (pulse[peak] < 0.0) {
        pulse = -pulse;
        best_w = -best_w;
    }

    Eigen::VectorXd weights = white.map.transpose() * best_w;
    const double wn = weights.norm();
    if (wn > 0.0) weights /= wn;

    out.pulse.samples = std::move(pulse);
    out.pulse.fps = s.fps;
    out.unmixing.weights = std::move(weights);
    return out;
}

}  // namespace mombat
