#pragma once

#include "mombat/bss.hpp"
#include "mombat/kernels.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct Spectrum {
    Eigen::VectorXd freqs;  // Hz, uniform grid over [band_lo, band_hi]
    Eigen::VectorXd mags;
    int window_id = -1;
};

// Magnitudes of the zero-padded DFT on the configured grid. The padded
// length makes the native bin spacing no coarser than the grid step and
// each grid value is read from the nearest native bin.
Spectrum compute_spectrum(const PulseSignal& pulse, const PipelineConfig& cfg,
                          kernels::Exec exec = kernels::Exec::Parallel);

struct PeakHr {
    double freq_hz = 0.0;
    int hr_bpm = 0;
};

// Global spectral peak; ties resolve to the lowest frequency, bpm rounds
// half away from zero.
PeakHr peak_hr(const Spectrum& spec);

int round_bpm(double freq_hz);

}  // namespace mombat
