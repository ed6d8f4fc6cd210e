#pragma once

#include <string>
#include <vector>

#include "mombat/pipeline.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct MetricsReport {
    int windows = 0;
    double mean_error_bpm = 0.0;    // signed, predicted minus actual
    double std_error_bpm = 0.0;     // sample standard deviation
    double within5_pct = 0.0;       // share of windows with |error| < 5 bpm, in percent
    double mae_bpm = 0.0;
    double pearson_rho = 0.0;       // 0 when either series is constant
    bool rho_defined = false;
};

// Linear interpolation of the ground truth at time t. t must lie inside the
// covered span.
double interp_truth(const GroundTruth& truth, double t);

MetricsReport compute_metrics_at(const std::vector<HrEstimate>& estimates,
                                 const GroundTruth& truth, const std::vector<double>& centers_s);
MetricsReport compute_metrics(const SessionResult& result, const GroundTruth& truth);

// CSV with one row per window: predicted vs interpolated actual HR.
std::string comparison_csv(const std::vector<HrEstimate>& estimates, const GroundTruth& truth);

std::string metrics_json(const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace mombat
