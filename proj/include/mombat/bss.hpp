#pragma once

#include <vector>

#include "mombat/preprocess.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct WhitenResult {
    Eigen::MatrixXd z;               // whitened rows, unit variance, uncorrelated
    Eigen::MatrixXd map;             // z = map * valid-row block of the input
    std::vector<int> kept_rows;      // indices of valid input rows
};

// PCA whitening over the valid rows. Directions whose eigenvalue falls
// below 1e-10 times the largest are dropped.
WhitenResult whiten(const TemporalSignalSet& s);

// Excess kurtosis with population moments: m4 / m2^2 - 3.
double kurtosis(const Eigen::VectorXd& x);

struct PulseSignal {
    Eigen::VectorXd samples;
    double fps = 0.0;
    int window_id = -1;
};

struct UnmixingVector {
    Eigen::VectorXd weights;  // one per valid ROI row, unit norm
    bool fallback = false;    // set when the search degenerated to the first principal component
};

struct PulseExtraction {
    PulseSignal pulse;
    UnmixingVector unmixing;
};

// Finds the unit direction in whitened space with maximal excess-kurtosis
// magnitude by fixed-point iteration from a fixed set of restart vectors,
// then applies the sign convention that the largest-magnitude sample is
// positive.
PulseExtraction extract_pulse(const TemporalSignalSet& s);

}  // namespace mombat
