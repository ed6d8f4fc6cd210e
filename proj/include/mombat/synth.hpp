#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mombat/types.hpp"

namespace mombat {

struct HrPoint {
    double time_s = 0.0;
    double hr_bpm = 0.0;
};

// Out-of-plane motion burst: boundary-landmark z excursions of the given
// amplitude (alternating sign frame to frame), with co-located trace
// corruption whose amplitude scales with z_amp. Corruption is random noise
// unless coherent_hz is set, in which case it is a sinusoid fragment at
// that frequency (a structured shading transient rather than sensor junk).
struct BurstInterval {
    double start_s = 0.0;
    double end_s = 0.0;
    double z_amp = 0.0;
    double coherent_hz = 0.0;
};

// In-band tone added to every ROI trace over [start_s, end_s); amp is
// relative to the pulse fundamental amplitude.
struct ToneInjection {
    double start_s = 0.0;
    double end_s = 0.0;
    double freq_hz = 0.0;
    double amp = 0.0;
};

// Pure out-of-plane motion: boundary-landmark z excursions with no trace
// effect. Sets the deviation ceiling the quality normalization sees, which
// is how a scenario pins milder artifacts at intermediate quality.
struct PoseEvent {
    double start_s = 0.0;
    double end_s = 0.0;
    double z_amp = 0.0;
};

struct SyntheticScenario {
    double duration_s = 60.0;
    double fps = 30.0;
    int rois = 5;
    std::vector<HrPoint> trajectory;  // piecewise-linear bpm, default constant 72
    double noise_sigma = 0.0;
    std::vector<BurstInterval> bursts;
    std::vector<ToneInjection> tones;
    std::vector<PoseEvent> pose_events;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SynthOutput {
    RoiTraceFile trace;
    LandmarkTrack landmarks;
    GroundTruth truth;
};

// Deterministic generator: the pulse is a sinusoid plus a 0.3-amplitude
// second harmonic at the instantaneous trajectory rate, mixed into each
// ROI with a random positive gain. All randomness comes from a splitmix64
// stream seeded by scenario.seed, so equal scenarios produce identical
// output. Ground truth is sampled at 2 Hz.
SynthOutput synth_generate(const SyntheticScenario& scn);

double trajectory_hr(const std::vector<HrPoint>& traj, double t);

// key=value text: duration_s, fps, rois, seed, noise_sigma, hr_bpm or
// hr_trajectory=t:bpm,t:bpm,..., repeatable burst=start:end:z_amp[:coherent_hz],
// tone=start:end:freq_hz:amp and pose=start:end:z_amp lines.
SyntheticScenario parse_scenario(const std::string& text);

}  // namespace mombat
