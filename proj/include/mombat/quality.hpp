#pragma once

#include "mombat/spectral.hpp"
#include "mombat/types.hpp"

namespace mombat {

using QualitySeries = Eigen::VectorXd;  // values in [0, 1], one per frame pair

// d[k] = max over boundary landmarks of |z at frame k+1 minus z at frame k|.
Eigen::VectorXd out_of_plane_deviations(const LandmarkTrack& track);

// Min-max normalized confidence: 1 - (d - min) / (max - min). A constant
// deviation series maps to all ones.
QualitySeries quality_from_deviations(const Eigen::VectorXd& d);

// Peak-to-rest spectral energy ratio: the sum over the peak window of
// n_p bins each side (clamped at the band edges) divided by the remaining
// energy, floored at 1e-12 of the total and capped at 1e6.
double psnr(const Spectrum& spec, int n_p);

}  // namespace mombat
