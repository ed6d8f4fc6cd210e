#include "mombat/quality.hpp"

#include <algorithm>
#include <cmath>

namespace mombat {

Eigen::VectorXd out_of_plane_deviations(const LandmarkTrack& track) {
    if (track.frame_count() < 2) throw Error("need at least 2 frames of landmarks");
    std::vector<std::size_t> boundary;
    for (std::size_t i = 0; i < track.frames[0].size(); ++i)
        if (track.frames[0][i].group == LandmarkGroup::Boundary) boundary.push_back(i);
    if (boundary.empty()) throw Error("no boundary landmarks in track");

    Eigen::VectorXd d(track.frame_count() - 1);
    for (int k = 0; k + 1 < track.frame_count(); ++k) {
        double m = 0.0;
        for (std::size_t j : boundary)
            m = std::max(m, std::abs(track.frames[k + 1][j].z - track.frames[k][j].z));
        d[k] = m;
    }
    return d;
}

QualitySeries quality_from_deviations(const Eigen::VectorXd& d) {
    if (d.size() == 0) throw Error("empty deviation series");
    const double lo = d.minCoeff(), hi = d.maxCoeff();
    if (hi == lo) return Eigen::VectorXd::Ones(d.size());
    return 1.0 - ((d.array() - lo) / (hi - lo));
}

double psnr(const Spectrum& spec, int n_p) {
    if (n_p < 0) throw Error("n_p must be non-negative");
    const Eigen::Index n = spec.mags.size();
    if (n == 0) throw Error("psnr undefined for an empty spectrum");
    Eigen::Index arg = 0;
    const double peak = spec.mags.maxCoeff(&arg);
    if (peak == 0.0) throw Error("psnr undefined for an all-zero spectrum");

    const Eigen::Index lo = std::max<Eigen::Index>(0, arg - n_p);
    const Eigen::Index hi = std::min<Eigen::Index>(n - 1, arg + n_p);
    const double total = spec.mags.sum();
    const double num = spec.mags.segment(lo, hi - lo + 1).sum();
    const double floor = 1e-12 * total;
    const double den = std::max(total - num, floor);
    return std::min(num / den, 1e6);
}

}  // namespace mombat
