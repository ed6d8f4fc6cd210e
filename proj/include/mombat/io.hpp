#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mombat/types.hpp"

namespace mombat::io {

// Shortest decimal form that parses back to the same value.
std::string fmt_double(double v);
std::string fmt_int(long long v);

RoiTraceFile parse_roi_trace(const std::string& text);
std::string serialize_roi_trace(const RoiTraceFile& t);

LandmarkTrack parse_landmarks(const std::string& text);
std::string serialize_landmarks(const LandmarkTrack& t);

GroundTruth parse_ground_truth(const std::string& text);
std::string serialize_ground_truth(const GroundTruth& g);

// Binary P6 (RGB) and P5 (gray) with maxval 255.
FrameImage decode_ppm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_ppm(const FrameImage& img);

// key=value lines, '#' starts a comment, unknown keys are rejected.
void apply_config_file(PipelineConfig& cfg, const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& content);

}  // namespace mombat::io
