#pragma once

#include <array>
#include <span>
#include <vector>

#include "mombat/kernels.hpp"
#include "mombat/types.hpp"

namespace mombat {

// Consecutive-frame difference signals, one row per ROI block.
struct TemporalSignalSet {
    double fps = 0.0;
    Channel channel = Channel::Green;
    Eigen::MatrixXd signals;            // rois x (frames - 1)
    std::vector<std::uint8_t> valid;    // per row
    bool normalized = false;

    int rois() const { return static_cast<int>(signals.rows()); }
    int samples() const { return static_cast<int>(signals.cols()); }
};

struct WarpedGrid {
    std::vector<std::array<Vec2, 4>> corners;  // mapped block corners, clockwise from origin
    std::vector<std::uint8_t> valid;           // cleared when a block maps fully outside the frame
};

// Least-squares rigid motion taking prev onto cur (rotation about the
// centroid plus translation).
RigidTransform2D estimate_rigid_transform(std::span<const Vec2> prev, std::span<const Vec2> cur);

// Blocks tiling the mask bounding box on the first frame, kBlocksAcross
// blocks per row, partial edge blocks dropped. Without a mask the whole
// frame is treated as skin. Blocks containing no mask pixels are dropped.
RoiGrid build_grid(const FrameImage& first, const FrameImage* mask);

// Maps block corners by the inverse of the current-to-reference transform,
// giving sample positions in current-frame coordinates.
WarpedGrid warp_grid(const RoiGrid& grid, const RigidTransform2D& reg);

TemporalSignalSet extract_temporal_signals(const std::vector<FrameImage>& frames,
                                           const std::vector<FrameImage>* masks,
                                           const RoiGrid& grid,
                                           const std::vector<RigidTransform2D>& regs,
                                           Channel channel,
                                           double fps,
                                           kernels::Exec exec = kernels::Exec::Parallel);

// Trace-file path: per-ROI first differences of the mean intensity rows.
TemporalSignalSet first_difference_signals(const RoiTraceFile& trace, Channel channel);

// Row-wise (x - mean) / sample-std. Constant rows are zeroed and flagged
// invalid instead of dividing by zero.
TemporalSignalSet zscore(TemporalSignalSet s);

inline constexpr double kDetrendLambdaAt30Fps = 100.0;
inline double detrend_lambda(double fps) { return kDetrendLambdaAt30Fps * fps / 30.0; }

// Removes the smoothness-priors trend (I + lambda^2 D2' D2)^-1 x.
Eigen::VectorXd detrend(const Eigen::VectorXd& x, double lambda);

// Zero-phase band-pass: a causal Butterworth band-pass run forward and
// backward, with edge states solved for rather than guessed so short
// records come through without boundary transients.
Eigen::VectorXd bandpass(const Eigen::VectorXd& x, double fps, double lo, double hi);

// Two-pass magnitude response of the band-pass at frequency f, for tests.
double bandpass_gain(double fps, double lo, double hi, double f);

}  // namespace mombat
