#include "mombat/tracker.hpp"

#include <cmath>

namespace mombat {

Eigen::VectorXd prior_gaussian(const PriorState& state, const Eigen::VectorXd& grid, double c) {
    if (grid.size() == 0) throw Error("empty frequency grid");
    if (!(c > 0.0)) throw Error("c must be positive");
    if (!state.initialized || state.gamma == 0.0) return Eigen::VectorXd::Zero(grid.size());
    if (state.gamma < 0.0) throw Error("gamma must be non-negative");
    const double var = c / state.gamma;
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * var);
    return (norm * (-(grid.array() - state.freq_hz).square() / (2.0 * var)).exp()).matrix();
}

Eigen::VectorXd prior_density(const PriorState& state, const Eigen::VectorXd& grid, double c,
                              double c_hat) {
    if (c_hat < 0.0) throw Error("c_hat must be non-negative");
    Eigen::VectorXd p = prior_gaussian(state, grid, c).array() + c_hat;
    const double total = p.sum();
    if (total > 0.0) return p / total;
    return Eigen::VectorXd::Constant(grid.size(), 1.0 / static_cast<double>(grid.size()));
}

Eigen::VectorXd likelihood(const Spectrum& spec) {
    if (spec.mags.size() == 0) throw Error("likelihood undefined for an empty spectrum");
    const double total = spec.mags.sum();
    if (!(total > 0.0)) throw Error("likelihood undefined for an all-zero spectrum");
    return spec.mags / total;
}

HrEstimate map_estimate(const Spectrum& spec, const PriorState& state, const PipelineConfig& cfg) {
    const Eigen::VectorXd s = likelihood(spec);
    const Eigen::VectorXd g = prior_gaussian(state, spec.freqs, cfg.c);
    Eigen::VectorXd post = s.array() * (g.array() + cfg.c_hat);

    HrEstimate est;
    est.window = spec.window_id;
    const double total = post.sum();
    Eigen::Index arg = 0;
    if (total > 0.0) {
        post /= total;
        post.maxCoeff(&arg);  // first maximum, lowest frequency on ties
        est.posterior_peak = post[arg];
    } else {
        // c_hat == 0 and prior mass off-grid: fall back to the likelihood peak
        s.maxCoeff(&arg);
        est.posterior_peak = 0.0;
    }
    est.freq_hz = spec.freqs[arg];
    est.hr_bpm = round_bpm(est.freq_hz);
    return est;
}

std::vector<HrEstimate> track_sequence(const std::vector<Spectrum>& spectra,
                                       const std::vector<double>& gammas,
                                       const PipelineConfig& cfg) {
    if (spectra.size() != gammas.size())
        throw Error("one gamma required per window spectrum");

    std::vector<HrEstimate> out;
    out.reserve(spectra.size());
    PriorState state;
    for (std::size_t i = 0; i < spectra.size(); ++i) {
        const Spectrum& spec = spectra[i];
        const bool usable = spec.mags.size() > 0 && spec.mags.maxCoeff() > 0.0;
        HrEstimate est;
        if (!usable) {
            est.freq_hz = state.initialized ? state.freq_hz : 0.5 * (cfg.band_lo + cfg.band_hi);
            est.hr_bpm = round_bpm(est.freq_hz);
            est.flags |= kFlagHeld;
        } else {
            est = map_estimate(spec, state, cfg);
            state.freq_hz = est.freq_hz;
            state.gamma = gammas[i];
            state.initialized = true;
        }
        est.window = static_cast<int>(i);
        out.push_back(est);
    }
    return out;
}

}  // namespace mombat
