#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mombat {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class Channel { Green, Red };
enum class BasisKind { Fourier, Legendre, Polynomial };
enum class Variant { NorSysR, NorSysI, NorSys, PulseModP, PulseModL, PulseMod, BayTrack, Mombat };
enum class LandmarkGroup { Nose, Boundary, Eye, Other };

std::string to_string(Channel c);
std::string to_string(BasisKind b);
std::string to_string(Variant v);
std::string to_string(LandmarkGroup g);
Channel channel_from_string(const std::string& s);
BasisKind basis_from_string(const std::string& s);
Variant variant_from_string(const std::string& s);
LandmarkGroup group_from_string(const std::string& s);

inline constexpr int kBlocksAcross = 10;
inline constexpr double kHrMinBpm = 42.0;
inline constexpr double kHrMaxBpm = 240.0;

// Per-ROI mean intensity traces, rows are ROIs, columns are frames.
struct RoiTraceFile {
    double fps = 0.0;
    Eigen::MatrixXd green;
    std::optional<Eigen::MatrixXd> red;

    int rois() const { return static_cast<int>(green.rows()); }
    int frames() const { return static_cast<int>(green.cols()); }
};

struct Landmark {
    int id = 0;
    LandmarkGroup group = LandmarkGroup::Other;
    double x = 0.0, y = 0.0, z = 0.0;
};

// Facial landmark positions per frame. Every frame carries the same id set.
struct LandmarkTrack {
    double fps = 0.0;
    std::vector<std::vector<Landmark>> frames;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

// Interleaved 8-bit image, channels is 3 (RGB) or 1 (gray/mask).
struct FrameImage {
    int width = 0, height = 0, channels = 0;
    std::vector<std::uint8_t> pixels;

    std::uint8_t at(int x, int y, int c) const {
        return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
    }
};

struct GroundTruth {
    std::vector<double> time_s;
    std::vector<double> hr_bpm;

    int samples() const { return static_cast<int>(time_s.size()); }
};

struct Vec2 {
    double x = 0.0, y = 0.0;
};

// Rigid 2-D motion: p' = R(theta) * p + t.
struct RigidTransform2D {
    double theta = 0.0;
    double tx = 0.0, ty = 0.0;

    Vec2 apply(Vec2 p) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
    }
    RigidTransform2D inverse() const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {-theta, -(c * tx + s * ty), -(-s * tx + c * ty)};
    }
};

// a.then(b): apply a first, then b.
inline RigidTransform2D compose(const RigidTransform2D& second, const RigidTransform2D& first) {
    const double c = std::cos(second.theta), s = std::sin(second.theta);
    return {second.theta + first.theta,
            c * first.tx - s * first.ty + second.tx,
            s * first.tx + c * first.ty + second.ty};
}

// Square ROI blocks laid out on the first frame, kBlocksAcross per row.
struct RoiGrid {
    int frame_width = 0, frame_height = 0;
    int side = 0;
    std::vector<Vec2> origins;  // top-left corner of each block

    int blocks() const { return static_cast<int>(origins.size()); }
};

struct PipelineConfig {
    double fps = 30.0;
    double window_s = 4.0;
    double hop_s = 0.5;
    int alpha = 50;
    double c = 4.0;
    double c_hat = 0.4;
    double band_lo = 0.7;
    double band_hi = 4.0;
    int n_p = 2;
    double grid_bpm = 1.0;
    Channel channel = Channel::Green;
    std::optional<BasisKind> basis = BasisKind::Fourier;  // nullopt skips pulse modeling
    Variant variant = Variant::Mombat;

    int window_frames() const { return static_cast<int>(std::lround(window_s * fps)); }
    int hop_frames() const { return static_cast<int>(std::lround(hop_s * fps)); }
    double grid_step_hz() const { return grid_bpm / 60.0; }
    void validate() const;
};

}  // namespace mombat
