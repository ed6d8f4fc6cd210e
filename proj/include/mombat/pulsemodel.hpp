#pragma once

#include "mombat/bss.hpp"
#include "mombat/kernels.hpp"
#include "mombat/quality.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct BasisMatrix {
    BasisKind kind = BasisKind::Fourier;
    Eigen::MatrixXd phi;  // alpha rows sampled at n points

    int alpha() const { return static_cast<int>(phi.rows()); }
    int samples() const { return static_cast<int>(phi.cols()); }
};

// Row n (1-based) of the fourier basis is sin(((n+1)/2) t) for odd n and
// cos((n/2) t) for even n with t = 2 pi idx / n_samples. Legendre and
// polynomial rows are degree-n terms on [-1, 1]. No constant row.
BasisMatrix build_basis(BasisKind kind, int alpha, int n_samples);

// Coefficients minimizing || diag(q) (x - a' phi) ||_2, i.e. the normal
// equations weighted by q^2, with a 1e-10 * trace Tikhonov ridge.
Eigen::VectorXd fit_weighted(const PulseSignal& pulse, const BasisMatrix& basis,
                             const QualitySeries& quality,
                             kernels::Exec exec = kernels::Exec::Parallel);

PulseSignal reconstruct(const Eigen::VectorXd& coeffs, const BasisMatrix& basis, double fps,
                        int window_id = -1);

}  // namespace mombat
