#include "mombat/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "mombat/io.hpp"

namespace mombat {

double interp_truth(const GroundTruth& truth, double t) {
    if (truth.time_s.empty()) throw Error("ground truth is empty");
    const double lo = truth.time_s.front();
    const double hi = truth.time_s.back();
    if (t < lo - 1e-9 || t > hi + 1e-9)
        throw Error("ground truth does not cover t=" + io::fmt_double(t) + " s (span " +
                    io::fmt_double(lo) + ".." + io::fmt_double(hi) + ")");
    t = std::clamp(t, lo, hi);
    const auto it = std::upper_bound(truth.time_s.begin(), truth.time_s.end(), t);
    if (it == truth.time_s.begin()) return truth.hr_bpm.front();
    if (it == truth.time_s.end()) return truth.hr_bpm.back();
    const std::size_t j = static_cast<std::size_t>(it - truth.time_s.begin());
    const double t0 = truth.time_s[j - 1], t1 = truth.time_s[j];
    const double h0 = truth.hr_bpm[j - 1], h1 = truth.hr_bpm[j];
    return h0 + (h1 - h0) * (t - t0) / (t1 - t0);
}

MetricsReport compute_metrics_at(const std::vector<HrEstimate>& estimates,
                                 const GroundTruth& truth, const std::vector<double>& centers_s) {
    if (estimates.size() != centers_s.size())
        throw Error("estimate count differs from window center count");
    if (estimates.empty()) throw Error("no windows to score");
    const int n = static_cast<int>(estimates.size());

    Eigen::VectorXd pred(n), actual(n);
    for (int i = 0; i < n; ++i) {
        pred[i] = static_cast<double>(estimates[static_cast<std::size_t>(i)].hr_bpm);
        actual[i] = interp_truth(truth, centers_s[static_cast<std::size_t>(i)]);
    }
    const Eigen::VectorXd err = pred - actual;

    MetricsReport rep;
    rep.windows = n;
    rep.mean_error_bpm = err.mean();
    if (n > 1) {
        const Eigen::VectorXd d = err.array() - rep.mean_error_bpm;
        rep.std_error_bpm = std::sqrt(d.squaredNorm() / static_cast<double>(n - 1));
    }
    rep.within5_pct = 100.0 * static_cast<double>((err.array().abs() < 5.0).count()) /
                      static_cast<double>(n);
    rep.mae_bpm = err.array().abs().mean();

    const Eigen::VectorXd dp = pred.array() - pred.mean();
    const Eigen::VectorXd da = actual.array() - actual.mean();
    const double vp = dp.squaredNorm();
    const double va = da.squaredNorm();
    if (vp > 0.0 && va > 0.0) {
        rep.pearson_rho = dp.dot(da) / std::sqrt(vp * va);
        rep.rho_defined = true;
    }
    return rep;
}

MetricsReport compute_metrics(const SessionResult& result, const GroundTruth& truth) {
    std::vector<double> centers;
    centers.reserve(result.estimates.size());
    for (int i = 0; i < result.plan.count(); ++i) centers.push_back(result.plan.center_s(i));
    return compute_metrics_at(result.estimates, truth, centers);
}

std::string comparison_csv(const std::vector<HrEstimate>& estimates, const GroundTruth& truth) {
    std::string out = "window,time_s,predicted_bpm,actual_bpm\n";
    for (const HrEstimate& e : estimates) {
        out += io::fmt_int(e.window) + "," + io::fmt_double(e.time_s) + "," + io::fmt_int(e.hr_bpm) +
               "," + io::fmt_double(interp_truth(truth, e.time_s)) + "\n";
    }
    return out;
}

std::string metrics_json(const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    nlohmann::ordered_json root;
    for (const auto& [name, rep] : reports) {
        nlohmann::ordered_json j;
        j["windows"] = rep.windows;
        j["mean_error_bpm"] = rep.mean_error_bpm;
        j["std_error_bpm"] = rep.std_error_bpm;
        j["within5_pct"] = rep.within5_pct;
        j["mae_bpm"] = rep.mae_bpm;
        j["pearson_rho"] = rep.pearson_rho;
        j["rho_defined"] = rep.rho_defined;
        root[name] = std::move(j);
    }
    return root.dump(2) + "\n";
}

}  // namespace mombat
