#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mombat/types.hpp"

namespace mombat::kernels {

enum class Exec { Serial, Parallel };

// out(i, k) = sum over pixels p of block i of
//   frames[k+1] sampled at W_{k+1}(p) minus frames[k] sampled at W_k(p),
// where W_k is the inverse of regs[k] (reference coords to frame-k coords)
// and sampling is nearest-pixel. Pixels falling outside a frame or onto a
// non-255 mask value in either frame are skipped. row_valid[i] is cleared
// when block i never contributes a pixel.
void block_diff_sums(const std::vector<FrameImage>& frames,
                     const std::vector<FrameImage>* masks,
                     const RoiGrid& grid,
                     const std::vector<RigidTransform2D>& regs,
                     int channel_index,
                     Exec exec,
                     Eigen::MatrixXd& out,
                     std::vector<std::uint8_t>& row_valid);

// Magnitudes of the length-m zero-padded DFT of x at the given bin indices.
Eigen::VectorXd band_dft(const Eigen::VectorXd& x, const std::vector<long>& bins, long m, Exec exec);

// g = phi * diag(w) * phi^T and rhs = phi * diag(w) * x.
void weighted_gram(const Eigen::MatrixXd& phi,
                   const Eigen::VectorXd& w,
                   const Eigen::VectorXd& x,
                   Exec exec,
                   Eigen::MatrixXd& g,
                   Eigen::VectorXd& rhs);

}  // namespace mombat::kernels
