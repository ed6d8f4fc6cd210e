#pragma once

#include <vector>

#include "mombat/spectral.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct PriorState {
    double freq_hz = 0.0;
    double gamma = 0.0;
    bool initialized = false;
};

inline constexpr unsigned kFlagHeld = 1u;           // window had no usable spectrum
inline constexpr unsigned kFlagModelFallback = 2u;  // weighted fit failed, raw pulse used
inline constexpr unsigned kFlagBssFallback = 4u;    // kurtosis search degenerated to PCA

struct HrEstimate {
    int window = -1;
    double time_s = 0.0;
    double freq_hz = 0.0;
    int hr_bpm = 0;
    double posterior_peak = 0.0;
    unsigned flags = 0;
};

// Gaussian prior values g(theta) = N(theta; freq, c / gamma) on the grid,
// zero when uninitialized or gamma is zero.
Eigen::VectorXd prior_gaussian(const PriorState& state, const Eigen::VectorXd& grid, double c);

// P_e proportional to c_hat + g(theta), normalized to sum 1 over the grid.
Eigen::VectorXd prior_density(const PriorState& state, const Eigen::VectorXd& grid, double c,
                              double c_hat);

// Spectrum magnitudes normalized to sum 1.
Eigen::VectorXd likelihood(const Spectrum& spec);

// argmax of S(theta) * (c_hat + g(theta)); ties resolve to the lowest
// frequency.
HrEstimate map_estimate(const Spectrum& spec, const PriorState& state, const PipelineConfig& cfg);

// Left fold over the windows: each valid window updates the prior center
// and gamma. Windows without a usable spectrum emit the prior mean with
// the held flag set and leave the state unchanged.
std::vector<HrEstimate> track_sequence(const std::vector<Spectrum>& spectra,
                                       const std::vector<double>& gammas,
                                       const PipelineConfig& cfg);

}  // namespace mombat
