#include "mombat/spectral.hpp"

#include <cmath>

namespace mombat {

Spectrum compute_spectrum(const PulseSignal& pulse, const PipelineConfig& cfg, kernels::Exec exec) {
    const Eigen::Index n = pulse.samples.size();
    if (n < 8) throw Error("pulse too short for a spectrum (need at least 8 samples)");
    const double fps = pulse.fps;
    if (!(fps > 0.0)) throw Error("pulse has no sampling rate");
    const double step = cfg.grid_step_hz();
    if (!(step > 0.0)) throw Error("grid step must be positive");
    if (cfg.band_lo >= fps / 2.0 || cfg.band_lo >= cfg.band_hi)
        throw Error("band empty under this sampling rate");

    const long count = static_cast<long>(std::floor((cfg.band_hi - cfg.band_lo) / step + 1e-9)) + 1;
    if (count < 1) throw Error("band empty under this sampling rate");

    const long m = std::max<long>(n, static_cast<long>(std::ceil(fps / step - 1e-9)));
    Spectrum spec;
    spec.window_id = pulse.window_id;
    spec.freqs.resize(count);
    std::vector<long> bins(static_cast<std::size_t>(count));
    for (long j = 0; j < count; ++j) {
        const double f = cfg.band_lo + static_cast<double>(j) * step;
        spec.freqs[j] = f;
        bins[static_cast<std::size_t>(j)] = std::lround(f * static_cast<double>(m) / fps);
    }
    spec.mags = kernels::band_dft(pulse.samples, bins, m, exec);
    return spec;
}

int round_bpm(double freq_hz) {
    return static_cast<int>(std::llround(freq_hz * 60.0));
}

PeakHr peak_hr(const Spectrum& spec) {
    if (spec.mags.size() == 0) throw Error("no peak: spectrum is empty");
    Eigen::Index arg = 0;
    const double peak = spec.mags.maxCoeff(&arg);
    if (peak == 0.0) throw Error("no peak: spectrum is all zero");
    // maxCoeff returns the first maximum, which is the lowest frequency
    PeakHr out;
    out.freq_hz = spec.freqs[arg];
    out.hr_bpm = round_bpm(out.freq_hz);
    return out;
}

}  // namespace mombat
