#include "mombat/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mombat {

std::string to_string(Channel c) { return c == Channel::Green ? "green" : "red"; }

std::string to_string(BasisKind b) {
    switch (b) {
        case BasisKind::Fourier: return "fourier";
        case BasisKind::Legendre: return "legendre";
        default: return "polynomial";
    }
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::NorSysR: return "NorSysR";
        case Variant::NorSysI: return "NorSysI";
        case Variant::NorSys: return "NorSys";
        case Variant::PulseModP: return "PulseModP";
        case Variant::PulseModL: return "PulseModL";
        case Variant::PulseMod: return "PulseMod";
        case Variant::BayTrack: return "BayTrack";
        default: return "MOMBAT";
    }
}

std::string to_string(LandmarkGroup g) {
    switch (g) {
        case LandmarkGroup::Nose: return "nose";
        case LandmarkGroup::Boundary: return "boundary";
        case LandmarkGroup::Eye: return "eye";
        default: return "other";
    }
}

Channel channel_from_string(const std::string& s) {
    if (s == "green") return Channel::Green;
    if (s == "red") return Channel::Red;
    throw Error("unknown channel '" + s + "' (expected green or red)");
}

BasisKind basis_from_string(const std::string& s) {
    if (s == "fourier") return BasisKind::Fourier;
    if (s == "legendre") return BasisKind::Legendre;
    if (s == "polynomial") return BasisKind::Polynomial;
    throw Error("unknown basis '" + s + "' (expected fourier, legendre or polynomial)");
}

Variant variant_from_string(const std::string& s) {
    for (Variant v : {Variant::NorSysR, Variant::NorSysI, Variant::NorSys, Variant::PulseModP,
                      Variant::PulseModL, Variant::PulseMod, Variant::BayTrack, Variant::Mombat}) {
        if (to_string(v) == s) return v;
    }
    throw Error("unknown variant '" + s + "'");
}

LandmarkGroup group_from_string(const std::string& s) {
    if (s == "nose") return LandmarkGroup::Nose;
    if (s == "boundary") return LandmarkGroup::Boundary;
    if (s == "eye") return LandmarkGroup::Eye;
    if (s == "other") return LandmarkGroup::Other;
    throw Error("unknown landmark group '" + s + "'");
}

void PipelineConfig::validate() const {
    if (!(fps > 0.0) || !std::isfinite(fps)) throw Error("config: fps must be positive");
    if (!(window_s > 0.0)) throw Error("config: window_s must be positive");
    if (!(hop_s > 0.0) || hop_s > window_s) throw Error("config: hop_s must be in (0, window_s]");
    if (alpha < 1) throw Error("config: alpha must be at least 1");
    if (alpha >= window_frames()) throw Error("config: alpha must be smaller than the window frame count");
    if (!(c > 0.0)) throw Error("config: c must be positive");
    if (c_hat < 0.0) throw Error("config: c_hat must be non-negative");
    if (!(band_lo > 0.0) || !(band_lo < band_hi)) throw Error("config: band must satisfy 0 < band_lo < band_hi");
    if (!(band_hi < fps / 2.0)) throw Error("config: band_hi must be below the Nyquist frequency");
    if (n_p < 0) throw Error("config: n_p must be non-negative");
    if (!(grid_bpm > 0.0)) throw Error("config: grid_bpm must be positive");
}

}  // namespace mombat

namespace mombat::io {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) {
            lines.push_back(text.substr(pos));
            break;
        }
        std::string line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = nl + 1;
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, comma - pos));
        pos = comma + 1;
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

double parse_double_strict(const std::string& s, const char* what, std::size_t line_no) {
    const std::string t = trim(s);
    double v = 0.0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw Error("line " + std::to_string(line_no) + ": bad " + std::string(what) + " value '" + s + "'");
    if (!std::isfinite(v))
        throw Error("line " + std::to_string(line_no) + ": non-finite " + std::string(what) + " value");
    return v;
}

long long parse_int_strict(const std::string& s, const char* what, std::size_t line_no) {
    const std::string t = trim(s);
    long long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw Error("line " + std::to_string(line_no) + ": bad " + std::string(what) + " value '" + s + "'");
    return v;
}

double parse_fps_header(const std::vector<std::string>& lines) {
    if (lines.empty() || lines[0].rfind("fps=", 0) != 0)
        throw Error("missing fps= header line");
    double fps = parse_double_strict(lines[0].substr(4), "fps", 1);
    if (!(fps > 0.0)) throw Error("fps must be positive");
    return fps;
}

bool blank(const std::string& s) { return trim(s).empty(); }

}  // namespace

std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

std::string fmt_int(long long v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

RoiTraceFile parse_roi_trace(const std::string& text) {
    const auto lines = split_lines(text);
    RoiTraceFile t;
    t.fps = parse_fps_header(lines);
    if (lines.size() < 2) throw Error("missing column header row");
    const std::string header = trim(lines[1]);
    bool has_red = false;
    if (header == "frame,roi,green") {
        has_red = false;
    } else if (header == "frame,roi,green,red") {
        has_red = true;
    } else {
        throw Error("line 2: expected column header 'frame,roi,green[,red]', got '" + lines[1] + "'");
    }

    struct Cell {
        double green, red;
    };
    std::map<std::pair<long long, long long>, Cell> cells;
    long long max_frame = -1, max_roi = -1;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != (has_red ? 4u : 3u))
            throw Error("line " + std::to_string(i + 1) + ": expected " + std::to_string(has_red ? 4 : 3) +
                        " fields, got " + std::to_string(f.size()));
        long long frame = parse_int_strict(f[0], "frame", i + 1);
        long long roi = parse_int_strict(f[1], "roi", i + 1);
        if (frame < 0 || roi < 0)
            throw Error("line " + std::to_string(i + 1) + ": negative frame or roi index");
        Cell cell{parse_double_strict(f[2], "green", i + 1),
                  has_red ? parse_double_strict(f[3], "red", i + 1) : 0.0};
        if (!cells.emplace(std::make_pair(frame, roi), cell).second)
            throw Error("line " + std::to_string(i + 1) + ": duplicate entry for frame " +
                        std::to_string(frame) + " roi " + std::to_string(roi));
        max_frame = std::max(max_frame, frame);
        max_roi = std::max(max_roi, roi);
    }
    const long long frames = max_frame + 1, rois = max_roi + 1;
    if (frames < 2) throw Error("trace must cover at least 2 frames");
    if (rois < 1) throw Error("trace must cover at least 1 ROI");
    if (static_cast<long long>(cells.size()) != frames * rois)
        throw Error("inconsistent ROI count: expected " + std::to_string(frames * rois) +
                    " rows covering every frame/roi pair, got " + std::to_string(cells.size()));

    t.green.resize(rois, frames);
    if (has_red) t.red.emplace(rois, frames);
    for (const auto& [key, cell] : cells) {
        t.green(key.second, key.first) = cell.green;
        if (has_red) (*t.red)(key.second, key.first) = cell.red;
    }
    return t;
}

std::string serialize_roi_trace(const RoiTraceFile& t) {
    std::string out = "fps=" + fmt_double(t.fps) + "\n";
    out += t.red ? "frame,roi,green,red\n" : "frame,roi,green\n";
    for (int f = 0; f < t.frames(); ++f) {
        for (int r = 0; r < t.rois(); ++r) {
            out += fmt_int(f) + "," + fmt_int(r) + "," + fmt_double(t.green(r, f));
            if (t.red) out += "," + fmt_double((*t.red)(r, f));
            out += "\n";
        }
    }
    return out;
}

LandmarkTrack parse_landmarks(const std::string& text) {
    const auto lines = split_lines(text);
    LandmarkTrack t;
    t.fps = parse_fps_header(lines);
    if (lines.size() < 2 || trim(lines[1]) != "frame,id,group,x,y,z")
        throw Error("line 2: expected column header 'frame,id,group,x,y,z'");

    std::map<long long, std::vector<Landmark>> by_frame;
    for (std::size_t i = 2; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != 6)
            throw Error("line " + std::to_string(i + 1) + ": expected 6 fields, got " + std::to_string(f.size()));
        long long frame = parse_int_strict(f[0], "frame", i + 1);
        if (frame < 0) throw Error("line " + std::to_string(i + 1) + ": negative frame index");
        Landmark lm;
        lm.id = static_cast<int>(parse_int_strict(f[1], "id", i + 1));
        lm.group = group_from_string(trim(f[2]));
        lm.x = parse_double_strict(f[3], "x", i + 1);
        lm.y = parse_double_strict(f[4], "y", i + 1);
        lm.z = parse_double_strict(f[5], "z", i + 1);
        by_frame[frame].push_back(lm);
    }
    if (by_frame.empty()) throw Error("landmark file has no data rows");
    const long long frames = by_frame.rbegin()->first + 1;
    if (static_cast<long long>(by_frame.size()) != frames)
        throw Error("landmark file skips frames (expected every frame in 0.." + std::to_string(frames - 1) + ")");

    auto id_signature = [](const std::vector<Landmark>& lms) {
        std::set<int> ids;
        for (const auto& lm : lms) {
            if (!ids.insert(lm.id).second) throw Error("duplicate landmark id " + std::to_string(lm.id));
        }
        return ids;
    };
    const auto ref_ids = id_signature(by_frame.begin()->second);
    t.frames.resize(frames);
    for (auto& [frame, lms] : by_frame) {
        if (id_signature(lms) != ref_ids)
            throw Error("id set mismatch at frame " + std::to_string(frame));
        std::sort(lms.begin(), lms.end(), [](const Landmark& a, const Landmark& b) { return a.id < b.id; });
        t.frames[frame] = std::move(lms);
    }
    return t;
}

std::string serialize_landmarks(const LandmarkTrack& t) {
    std::string out = "fps=" + fmt_double(t.fps) + "\n";
    out += "frame,id,group,x,y,z\n";
    for (int f = 0; f < t.frame_count(); ++f) {
        for (const auto& lm : t.frames[f]) {
            out += fmt_int(f) + "," + fmt_int(lm.id) + "," + to_string(lm.group) + "," + fmt_double(lm.x) +
                   "," + fmt_double(lm.y) + "," + fmt_double(lm.z) + "\n";
        }
    }
    return out;
}

GroundTruth parse_ground_truth(const std::string& text) {
    const auto lines = split_lines(text);
    GroundTruth g;
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == "time_s,hr_bpm") start = 1;
    for (std::size_t i = start; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto f = split_fields(lines[i]);
        if (f.size() != 2)
            throw Error("line " + std::to_string(i + 1) + ": expected 2 fields, got " + std::to_string(f.size()));
        g.time_s.push_back(parse_double_strict(f[0], "time_s", i + 1));
        g.hr_bpm.push_back(parse_double_strict(f[1], "hr_bpm", i + 1));
    }
    if (g.time_s.empty()) throw Error("ground truth file has no samples");
    for (std::size_t i = 0; i < g.time_s.size(); ++i) {
        if (i > 0 && !(g.time_s[i] > g.time_s[i - 1]))
            throw Error("ground truth times must be strictly increasing (at sample " + std::to_string(i) + ")");
        if (g.hr_bpm[i] < kHrMinBpm || g.hr_bpm[i] > kHrMaxBpm)
            throw Error("ground truth hr " + fmt_double(g.hr_bpm[i]) + " outside valid range [42, 240]");
    }
    return g;
}

std::string serialize_ground_truth(const GroundTruth& g) {
    std::string out;
    for (int i = 0; i < g.samples(); ++i)
        out += fmt_double(g.time_s[i]) + "," + fmt_double(g.hr_bpm[i]) + "\n";
    return out;
}

namespace {

// Skips netpbm whitespace and '#' comments, then reads one unsigned decimal.
long pnm_next_int(const std::vector<std::uint8_t>& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (std::isspace(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) throw Error("truncated or malformed image header");
    long v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
        v = v * 10 + (b[pos] - '0');
        if (v > 1000000000L) throw Error("image header value out of range");
        ++pos;
    }
    return v;
}

}  // namespace

FrameImage decode_ppm(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 2) throw Error("image too short");
    FrameImage img;
    if (bytes[0] == 'P' && bytes[1] == '6') {
        img.channels = 3;
    } else if (bytes[0] == 'P' && bytes[1] == '5') {
        img.channels = 1;
    } else {
        throw Error("bad magic (expected P5 or P6)");
    }
    std::size_t pos = 2;
    img.width = static_cast<int>(pnm_next_int(bytes, pos));
    img.height = static_cast<int>(pnm_next_int(bytes, pos));
    const long maxval = pnm_next_int(bytes, pos);
    if (img.width <= 0 || img.height <= 0) throw Error("bad image dimensions");
    if (maxval != 255) throw Error("unsupported maxval " + std::to_string(maxval) + " (expected 255)");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error("malformed image header");
    ++pos;
    const std::size_t payload = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (bytes.size() - pos < payload) throw Error("truncated image payload");
    img.pixels.assign(bytes.begin() + pos, bytes.begin() + pos + payload);
    return img;
}

std::vector<std::uint8_t> encode_ppm(const FrameImage& img) {
    if (img.channels != 1 && img.channels != 3) throw Error("image must have 1 or 3 channels");
    const std::size_t payload = static_cast<std::size_t>(img.width) * img.height * img.channels;
    if (img.pixels.size() != payload) throw Error("image pixel buffer size mismatch");
    std::string header = std::string(img.channels == 3 ? "P6" : "P5") + "\n" + fmt_int(img.width) + " " +
                         fmt_int(img.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

void apply_config_file(PipelineConfig& cfg, const std::string& text) {
    const auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string line = lines[i];
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("line " + std::to_string(i + 1) + ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "fps") cfg.fps = parse_double_strict(value, "fps", i + 1);
        else if (key == "window_s") cfg.window_s = parse_double_strict(value, "window_s", i + 1);
        else if (key == "hop_s") cfg.hop_s = parse_double_strict(value, "hop_s", i + 1);
        else if (key == "alpha") cfg.alpha = static_cast<int>(parse_int_strict(value, "alpha", i + 1));
        else if (key == "c") cfg.c = parse_double_strict(value, "c", i + 1);
        else if (key == "c_hat") cfg.c_hat = parse_double_strict(value, "c_hat", i + 1);
        else if (key == "band_lo") cfg.band_lo = parse_double_strict(value, "band_lo", i + 1);
        else if (key == "band_hi") cfg.band_hi = parse_double_strict(value, "band_hi", i + 1);
        else if (key == "n_p") cfg.n_p = static_cast<int>(parse_int_strict(value, "n_p", i + 1));
        else if (key == "grid_bpm") cfg.grid_bpm = parse_double_strict(value, "grid_bpm", i + 1);
        else if (key == "channel") cfg.channel = channel_from_string(value);
        else if (key == "basis") {
            if (value == "none") cfg.basis = std::nullopt;
            else cfg.basis = basis_from_string(value);
        }
        else if (key == "variant") cfg.variant = variant_from_string(value);
        else throw Error("line " + std::to_string(i + 1) + ": unknown config key '" + key + "'");
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path.string() + ": cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path.string() + ": cannot open file");
    std::vector<std::uint8_t> out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path.string() + ": cannot open file for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(path.string() + ": write failed");
}

void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path.string() + ": cannot open file for writing");
    out.write(reinterpret_cast<const char*>(content.data()), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace mombat::io
