#include "mombat/synth.hpp"

#include <algorithm>
#include <cmath>

#include "mombat/io.hpp"

namespace mombat {

namespace {

constexpr double kPulseAmp = 2.0;
constexpr double kRedGainScale = 0.4;
constexpr double kTruthRateHz = 2.0;

struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return (next() >> 11) * 0x1.0p-53; }
    double centered() { return 2.0 * uniform() - 1.0; }
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * uniform());
    }
};

bool inside(double t, double start, double end) { return t >= start && t < end; }

}  // namespace

void SyntheticScenario::validate() const {
    if (!(duration_s > 0.0)) throw Error("scenario: duration_s must be positive");
    if (!(fps > 0.0)) throw Error("scenario: fps must be positive");
    if (std::lround(duration_s * fps) < 2) throw Error("scenario: too short for 2 frames");
    if (rois < 1) throw Error("scenario: rois must be at least 1");
    if (noise_sigma < 0.0) throw Error("scenario: noise_sigma must be non-negative");
    if (trajectory.empty()) throw Error("scenario: empty hr trajectory");
    for (std::size_t i = 0; i < trajectory.size(); ++i) {
        if (trajectory[i].hr_bpm < kHrMinBpm || trajectory[i].hr_bpm > kHrMaxBpm)
            throw Error("scenario: trajectory hr outside [42, 240]");
        if (i > 0 && !(trajectory[i].time_s > trajectory[i - 1].time_s))
            throw Error("scenario: trajectory times must be strictly increasing");
    }
    for (const auto& b : bursts)
        if (!(b.start_s < b.end_s) || b.start_s < 0.0 || b.end_s > duration_s || b.z_amp <= 0.0)
            throw Error("scenario: bad burst interval");
    for (const auto& t : tones)
        if (!(t.start_s < t.end_s) || t.start_s < 0.0 || t.end_s > duration_s || t.amp <= 0.0 ||
            t.freq_hz <= 0.0)
            throw Error("scenario: bad tone injection");
    for (const auto& p : pose_events)
        if (!(p.start_s < p.end_s) || p.start_s < 0.0 || p.end_s > duration_s || p.z_amp <= 0.0)
            throw Error("scenario: bad pose event");
}

double trajectory_hr(const std::vector<HrPoint>& traj, double t) {
    if (traj.empty()) throw Error("empty hr trajectory");
    if (t <= traj.front().time_s) return traj.front().hr_bpm;
    if (t >= traj.back().time_s) return traj.back().hr_bpm;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (t <= traj[i].time_s) {
            const double u = (t - traj[i - 1].time_s) / (traj[i].time_s - traj[i - 1].time_s);
            return traj[i - 1].hr_bpm + u * (traj[i].hr_bpm - traj[i - 1].hr_bpm);
        }
    }
    return traj.back().hr_bpm;
}

SynthOutput synth_generate(const SyntheticScenario& scn) {
    scn.validate();
    const int frames = static_cast<int>(std::lround(scn.duration_s * scn.fps));
    const double dt = 1.0 / scn.fps;
    SplitMix64 rng{scn.seed};

    std::vector<double> gains(static_cast<std::size_t>(scn.rois));
    for (double& g : gains) g = 0.5 + rng.uniform();
    double phase = rng.uniform() * 2.0 * M_PI;

    SynthOutput out;
    out.trace.fps = scn.fps;
    out.trace.green.resize(scn.rois, frames);
    out.trace.red.emplace(scn.rois, frames);
    out.landmarks.fps = scn.fps;
    out.landmarks.frames.resize(static_cast<std::size_t>(frames));

    // static face geometry, nose ids 0-3, boundary ids 10-17, eye ids 20-21
    const std::vector<Vec2> nose = {{30, 40}, {34, 40}, {30, 44}, {34, 44}};
    std::vector<Vec2> boundary;
    for (int i = 0; i < 8; ++i)
        boundary.push_back({32.0 + 28.0 * std::cos(i * M_PI / 4.0), 42.0 + 30.0 * std::sin(i * M_PI / 4.0)});
    const std::vector<Vec2> eyes = {{22, 30}, {42, 30}};

    for (int k = 0; k < frames; ++k) {
        const double t = k * dt;
        const double hr = trajectory_hr(scn.trajectory, t);
        if (k > 0) phase += 2.0 * M_PI * (hr / 60.0) * dt;
        const double pulse = std::sin(phase) + 0.3 * std::sin(2.0 * phase);

        bool in_burst = false;
        bool in_core = false;
        const BurstInterval* burst = nullptr;
        for (const auto& b : scn.bursts) {
            if (inside(t, b.start_s, b.end_s)) {
                in_burst = true;
                in_core = inside(t, b.start_s + dt, b.end_s - dt);
                burst = &b;
                break;
            }
        }
        // alternating sign keeps every in-burst frame pair at the maximum
        // z deviation, so the quality mask goes fully to zero inside bursts;
        // trace corruption rides only the interior frames so it never touches
        // a half-weighted boundary pair
        double z = in_burst ? (k % 2 == 0 ? burst->z_amp : -burst->z_amp) : 0.0;
        for (const auto& p : scn.pose_events)
            if (inside(t, p.start_s, p.end_s)) z += (k % 2 == 0 ? p.z_amp : -p.z_amp);
        double corruption = 0.0;
        if (in_core) {
            const double shape = burst->coherent_hz > 0.0
                                     ? std::sin(2.0 * M_PI * burst->coherent_hz * (t - burst->start_s))
                                     : rng.centered();
            corruption = burst->z_amp * kPulseAmp * shape;
        }

        double tone = 0.0;
        for (const auto& tj : scn.tones)
            if (inside(t, tj.start_s, tj.end_s))
                tone += tj.amp * kPulseAmp * std::sin(2.0 * M_PI * tj.freq_hz * (t - tj.start_s));

        const double common = kPulseAmp * pulse + tone + corruption;
        for (int r = 0; r < scn.rois; ++r) {
            out.trace.green(r, k) = 120.0 + gains[r] * common + scn.noise_sigma * rng.normal();
            (*out.trace.red)(r, k) =
                100.0 + kRedGainScale * gains[r] * common + scn.noise_sigma * rng.normal();
        }

        auto& lms = out.landmarks.frames[static_cast<std::size_t>(k)];
        for (int i = 0; i < 4; ++i)
            lms.push_back({i, LandmarkGroup::Nose, nose[i].x, nose[i].y, 0.0});
        for (int i = 0; i < 8; ++i)
            lms.push_back({10 + i, LandmarkGroup::Boundary, boundary[i].x, boundary[i].y, z});
        for (int i = 0; i < 2; ++i)
            lms.push_back({20 + i, LandmarkGroup::Eye, eyes[i].x, eyes[i].y, 0.0});
    }

    for (double t = 0.0; t <= scn.duration_s + 1e-9; t += 1.0 / kTruthRateHz) {
        out.truth.time_s.push_back(t);
        out.truth.hr_bpm.push_back(trajectory_hr(scn.trajectory, t));
    }
    return out;
}

namespace {

std::vector<double> split_colon_doubles(const std::string& s, const char* what) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t colon = s.find(':', pos);
        const std::string piece = colon == std::string::npos ? s.substr(pos) : s.substr(pos, colon - pos);
        char* end = nullptr;
        const double v = std::strtod(piece.c_str(), &end);
        if (end == piece.c_str() || *end != '\0')
            throw Error(std::string("scenario: bad ") + what + " value '" + piece + "'");
        out.push_back(v);
        if (colon == std::string::npos) return out;
        pos = colon + 1;
    }
}

}  // namespace

SyntheticScenario parse_scenario(const std::string& text) {
    SyntheticScenario scn;
    scn.trajectory = {{0.0, 72.0}};
    bool trajectory_set = false;

    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string line = nl == std::string::npos ? text.substr(pos) : text.substr(pos, nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t'))
            line.pop_back();
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.erase(0, 1);
        if (line.empty()) continue;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("scenario line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);

        if (key == "duration_s") scn.duration_s = split_colon_doubles(value, "duration_s")[0];
        else if (key == "fps") scn.fps = split_colon_doubles(value, "fps")[0];
        else if (key == "rois") scn.rois = static_cast<int>(split_colon_doubles(value, "rois")[0]);
        else if (key == "seed") scn.seed = static_cast<std::uint64_t>(std::strtoull(value.c_str(), nullptr, 10));
        else if (key == "noise_sigma") scn.noise_sigma = split_colon_doubles(value, "noise_sigma")[0];
        else if (key == "hr_bpm") {
            scn.trajectory = {{0.0, split_colon_doubles(value, "hr_bpm")[0]}};
            trajectory_set = true;
        } else if (key == "hr_trajectory") {
            scn.trajectory.clear();
            std::size_t p = 0;
            while (p <= value.size()) {
                const std::size_t comma = value.find(',', p);
                const std::string pair =
                    comma == std::string::npos ? value.substr(p) : value.substr(p, comma - p);
                const auto tv = split_colon_doubles(pair, "hr_trajectory");
                if (tv.size() != 2)
                    throw Error("scenario line " + std::to_string(line_no) +
                                ": hr_trajectory entries must be time:bpm");
                scn.trajectory.push_back({tv[0], tv[1]});
                if (comma == std::string::npos) break;
                p = comma + 1;
            }
            trajectory_set = true;
        } else if (key == "burst") {
            const auto v = split_colon_doubles(value, "burst");
            if (v.size() != 3 && v.size() != 4)
                throw Error("scenario line " + std::to_string(line_no) +
                            ": burst must be start:end:z_amp[:coherent_hz]");
            scn.bursts.push_back({v[0], v[1], v[2], v.size() == 4 ? v[3] : 0.0});
        } else if (key == "tone") {
            const auto v = split_colon_doubles(value, "tone");
            if (v.size() != 4)
                throw Error("scenario line " + std::to_string(line_no) +
                            ": tone must be start:end:freq_hz:amp");
            scn.tones.push_back({v[0], v[1], v[2], v[3]});
        } else if (key == "pose") {
            const auto v = split_colon_doubles(value, "pose");
            if (v.size() != 3)
                throw Error("scenario line " + std::to_string(line_no) +
                            ": pose must be start:end:z_amp");
            scn.pose_events.push_back({v[0], v[1], v[2]});
        } else {
            throw Error("scenario line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    (void)trajectory_set;
    scn.validate();
    return scn;
}

}  // namespace mombat
