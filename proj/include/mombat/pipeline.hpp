#pragma once

#include <optional>
#include <vector>

#include "mombat/kernels.hpp"
#include "mombat/tracker.hpp"
#include "mombat/types.hpp"

namespace mombat {

struct WindowPlan {
    double fps = 0.0;
    int window_frames = 0;
    int hop_frames = 0;
    std::vector<int> starts;

    int count() const { return static_cast<int>(starts.size()); }
    double center_s(int i) const { return (starts[i] + window_frames / 2.0) / fps; }
};

// Maximal arithmetic sequence of window starts fitting the session.
WindowPlan plan_windows(int frames, double fps, double window_s, double hop_s);

// The processing toggles behind each published variant name.
struct VariantSpec {
    Channel channel = Channel::Green;
    bool registration = false;
    std::optional<BasisKind> modeling;
    bool tracking = false;

    bool operator==(const VariantSpec&) const = default;
};

VariantSpec variant_spec(Variant v);

struct SessionInputs {
    const RoiTraceFile* trace = nullptr;
    const LandmarkTrack* landmarks = nullptr;
    const std::vector<FrameImage>* frames = nullptr;
    const std::vector<FrameImage>* masks = nullptr;
};

struct SessionResult {
    WindowPlan plan;
    std::vector<HrEstimate> estimates;
    std::vector<double> gammas;  // peak-to-rest ratio per window, 0 when held
};

SessionResult run_pipeline(const VariantSpec& spec, const SessionInputs& in, PipelineConfig cfg,
                           kernels::Exec exec = kernels::Exec::Parallel);

SessionResult run_variant(Variant v, const SessionInputs& in, const PipelineConfig& cfg,
                          kernels::Exec exec = kernels::Exec::Parallel);

// window,time_s,hr_bpm,freq_hz,flag rows.
std::string estimates_csv(const std::vector<HrEstimate>& estimates);
std::vector<HrEstimate> parse_estimates_csv(const std::string& text);

}  // namespace mombat
