#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mombat/io.hpp"
#include "mombat/metrics.hpp"
#include "mombat/pipeline.hpp"
#include "mombat/synth.hpp"

namespace fs = std::filesystem;

namespace {

using namespace mombat;

// Grammar-level problems that CLI11 cannot catch itself.
struct UsageError {
    std::string msg;
};

const std::vector<std::string> kVariantNames = {"NorSysR", "NorSysI", "NorSys",  "PulseModP",
                                                "PulseModL", "PulseMod", "BayTrack", "MOMBAT"};

struct ConfigCli {
    PipelineConfig vals;
    std::string channel_s = "green";
    std::string basis_s = "fourier";
    std::string variant_s = "MOMBAT";
    std::string config_path;
    bool verbose = false;
    bool serial = false;
    std::map<std::string, CLI::Option*> given;
};

void add_config_options(CLI::App* cmd, ConfigCli& c, bool with_fps) {
    auto track = [&](CLI::Option* o) { c.given[o->get_name()] = o; };
    if (with_fps)
        track(cmd->add_option("--fps", c.vals.fps, "frames per second (a trace file's header wins)")
                  ->default_str(io::fmt_double(c.vals.fps)));
    track(cmd->add_option("--window_s", c.vals.window_s, "analysis window length in seconds")
              ->default_str(io::fmt_double(c.vals.window_s)));
    track(cmd->add_option("--hop_s", c.vals.hop_s, "hop between window starts in seconds")
              ->default_str(io::fmt_double(c.vals.hop_s)));
    track(cmd->add_option("--alpha", c.vals.alpha, "basis function count for pulse modeling")
              ->default_str(io::fmt_int(c.vals.alpha)));
    track(cmd->add_option("--c", c.vals.c, "tracker prior variance scale")
              ->default_str(io::fmt_double(c.vals.c)));
    track(cmd->add_option("--c_hat", c.vals.c_hat, "tracker uniform prior level")
              ->default_str(io::fmt_double(c.vals.c_hat)));
    track(cmd->add_option("--band_lo", c.vals.band_lo, "passband low edge in Hz")
              ->default_str(io::fmt_double(c.vals.band_lo)));
    track(cmd->add_option("--band_hi", c.vals.band_hi, "passband high edge in Hz")
              ->default_str(io::fmt_double(c.vals.band_hi)));
    track(cmd->add_option("--n_p", c.vals.n_p, "peak neighborhood half width in bins")
              ->default_str(io::fmt_int(c.vals.n_p)));
    track(cmd->add_option("--grid_bpm", c.vals.grid_bpm, "frequency grid step in bpm")
              ->default_str(io::fmt_double(c.vals.grid_bpm)));
    track(cmd->add_option("--channel", c.channel_s, "color channel used by the full pipeline")
              ->default_str("green")
              ->check(CLI::IsMember({"green", "red"})));
    track(cmd->add_option("--basis", c.basis_s, "modeling basis used by the full pipeline")
              ->default_str("fourier")
              ->check(CLI::IsMember({"fourier", "legendre", "polynomial", "none"})));
    cmd->add_option("--config", c.config_path, "key=value config file; flags override its values");
    cmd->add_flag("--verbose", c.verbose, "print the resolved config to the error stream");
    cmd->add_flag("--serial", c.serial, "single-threaded reference execution");
}

void add_variant_option(CLI::App* cmd, ConfigCli& c) {
    c.given["--variant"] = cmd->add_option("--variant", c.variant_s, "pipeline variant to run")
                               ->default_str("MOMBAT")
                               ->check(CLI::IsMember(kVariantNames));
}

PipelineConfig resolve_config(const ConfigCli& c) {
    PipelineConfig cfg;
    if (!c.config_path.empty()) io::apply_config_file(cfg, io::read_text_file(c.config_path));
    auto on = [&](const char* name) {
        const auto it = c.given.find(name);
        return it != c.given.end() && it->second->count() > 0;
    };
    if (on("--fps")) cfg.fps = c.vals.fps;
    if (on("--window_s")) cfg.window_s = c.vals.window_s;
    if (on("--hop_s")) cfg.hop_s = c.vals.hop_s;
    if (on("--alpha")) cfg.alpha = c.vals.alpha;
    if (on("--c")) cfg.c = c.vals.c;
    if (on("--c_hat")) cfg.c_hat = c.vals.c_hat;
    if (on("--band_lo")) cfg.band_lo = c.vals.band_lo;
    if (on("--band_hi")) cfg.band_hi = c.vals.band_hi;
    if (on("--n_p")) cfg.n_p = c.vals.n_p;
    if (on("--grid_bpm")) cfg.grid_bpm = c.vals.grid_bpm;
    if (on("--channel")) cfg.channel = channel_from_string(c.channel_s);
    if (on("--basis")) {
        if (c.basis_s == "none") cfg.basis = std::nullopt;
        else cfg.basis = basis_from_string(c.basis_s);
    }
    if (on("--variant")) cfg.variant = variant_from_string(c.variant_s);
    return cfg;
}

void print_config(const PipelineConfig& cfg) {
    std::string text;
    text += "fps=" + io::fmt_double(cfg.fps) + "\n";
    text += "window_s=" + io::fmt_double(cfg.window_s) + "\n";
    text += "hop_s=" + io::fmt_double(cfg.hop_s) + "\n";
    text += "alpha=" + io::fmt_int(cfg.alpha) + "\n";
    text += "c=" + io::fmt_double(cfg.c) + "\n";
    text += "c_hat=" + io::fmt_double(cfg.c_hat) + "\n";
    text += "band_lo=" + io::fmt_double(cfg.band_lo) + "\n";
    text += "band_hi=" + io::fmt_double(cfg.band_hi) + "\n";
    text += "n_p=" + io::fmt_int(cfg.n_p) + "\n";
    text += "grid_bpm=" + io::fmt_double(cfg.grid_bpm) + "\n";
    text += "channel=" + to_string(cfg.channel) + "\n";
    text += "basis=" + (cfg.basis ? to_string(*cfg.basis) : std::string("none")) + "\n";
    text += "variant=" + to_string(cfg.variant) + "\n";
    std::fputs(text.c_str(), stderr);
}

void emit(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::fwrite(content.data(), 1, content.size(), stdout);
    } else {
        io::write_text_file(out_path, content);
    }
}

std::string numbered_name(const char* prefix, int k, const char* ext) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%s_%06d.%s", prefix, k, ext);
    return buf;
}

struct FrameDir {
    std::vector<FrameImage> frames;
    std::vector<FrameImage> masks;  // empty when no mask files present
};

FrameDir load_frame_dir(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(dir.string() + ": not a directory");
    FrameDir fd;
    for (int k = 0;; ++k) {
        const fs::path p = dir / numbered_name("frame", k, "ppm");
        if (!fs::exists(p)) break;
        fd.frames.push_back(io::decode_ppm(io::read_binary_file(p)));
    }
    if (fd.frames.size() < 2)
        throw Error(dir.string() + ": found " + std::to_string(fd.frames.size()) +
                    " frames, need at least 2 starting at frame_000000.ppm");
    if (fs::exists(dir / numbered_name("mask", 0, "pgm"))) {
        for (std::size_t k = 0; k < fd.frames.size(); ++k) {
            const fs::path p = dir / numbered_name("mask", static_cast<int>(k), "pgm");
            if (!fs::exists(p)) throw Error(p.string() + ": missing mask for frame " + std::to_string(k));
            FrameImage m = io::decode_ppm(io::read_binary_file(p));
            if (m.channels != 1) throw Error(p.string() + ": mask must be a grayscale PGM");
            if (m.width != fd.frames[k].width || m.height != fd.frames[k].height)
                throw Error(p.string() + ": mask size differs from its frame");
            for (std::uint8_t v : m.pixels)
                if (v != 0 && v != 255)
                    throw Error(p.string() + ": mask pixels must be 0 or 255");
            fd.masks.push_back(std::move(m));
        }
    }
    return fd;
}

int run_estimate(const std::string& trace_path, const std::string& lm_path, const ConfigCli& c,
                 const std::string& out_path) {
    const RoiTraceFile trace = io::parse_roi_trace(io::read_text_file(trace_path));
    std::optional<LandmarkTrack> lm;
    SessionInputs in;
    in.trace = &trace;
    if (!lm_path.empty()) {
        lm = io::parse_landmarks(io::read_text_file(lm_path));
        in.landmarks = &*lm;
    }
    const PipelineConfig cfg = resolve_config(c);
    if (c.verbose) print_config(cfg);
    const auto exec = c.serial ? kernels::Exec::Serial : kernels::Exec::Parallel;
    const SessionResult res = run_variant(cfg.variant, in, cfg, exec);
    emit(out_path, estimates_csv(res.estimates));
    return 0;
}

int run_frames(const std::string& dir, const std::string& lm_path, const ConfigCli& c,
               const std::string& out_path) {
    const FrameDir fd = load_frame_dir(dir);
    std::optional<LandmarkTrack> lm;
    SessionInputs in;
    in.frames = &fd.frames;
    if (!fd.masks.empty()) in.masks = &fd.masks;
    if (!lm_path.empty()) {
        lm = io::parse_landmarks(io::read_text_file(lm_path));
        in.landmarks = &*lm;
    }
    const PipelineConfig cfg = resolve_config(c);
    if (c.verbose) print_config(cfg);
    const auto exec = c.serial ? kernels::Exec::Serial : kernels::Exec::Parallel;
    const SessionResult res = run_variant(cfg.variant, in, cfg, exec);
    emit(out_path, estimates_csv(res.estimates));
    return 0;
}

int run_synth(const std::string& scenario_path, std::optional<std::uint64_t> seed,
              const std::string& out_dir) {
    SyntheticScenario scn = parse_scenario(io::read_text_file(scenario_path));
    if (seed) scn.seed = *seed;
    const SynthOutput out = synth_generate(scn);
    fs::create_directories(out_dir);
    io::write_text_file(fs::path(out_dir) / "trace.csv", io::serialize_roi_trace(out.trace));
    io::write_text_file(fs::path(out_dir) / "landmarks.csv", io::serialize_landmarks(out.landmarks));
    io::write_text_file(fs::path(out_dir) / "truth.csv", io::serialize_ground_truth(out.truth));
    return 0;
}

std::string window_table_csv(const std::vector<HrEstimate>& ests, const GroundTruth& truth) {
    std::string out = "window,time_s,predicted_bpm,actual_bpm,error_bpm,flag\n";
    for (const HrEstimate& e : ests) {
        const double actual = interp_truth(truth, e.time_s);
        out += io::fmt_int(e.window) + "," + io::fmt_double(e.time_s) + "," + io::fmt_int(e.hr_bpm) +
               "," + io::fmt_double(actual) + "," + io::fmt_double(e.hr_bpm - actual) + "," +
               io::fmt_int(e.flags) + "\n";
    }
    return out;
}

int run_bench(const std::string& scenario_path, const std::string& trace_path,
              const std::string& lm_path, const std::string& truth_path,
              const std::string& variants_s, std::optional<std::uint64_t> seed, const ConfigCli& c,
              const std::string& out_dir) {
    if (scenario_path.empty() && trace_path.empty())
        throw UsageError{"bench needs --scenario or --trace"};
    if (!trace_path.empty() && truth_path.empty())
        throw UsageError{"bench with --trace also needs --truth"};

    std::vector<Variant> variants;
    {
        std::size_t start = 0;
        const std::string s = variants_s;
        for (std::size_t i = 0; i <= s.size(); ++i) {
            if (i == s.size() || s[i] == ',') {
                const std::string name = s.substr(start, i - start);
                start = i + 1;
                if (name.empty()) continue;
                try {
                    variants.push_back(variant_from_string(name));
                } catch (const Error& e) {
                    throw UsageError{std::string("--variants: ") + e.what()};
                }
            }
        }
        if (variants.empty()) throw UsageError{"--variants lists no variant"};
    }

    RoiTraceFile trace;
    std::optional<LandmarkTrack> lm;
    GroundTruth truth;
    if (!scenario_path.empty()) {
        SyntheticScenario scn = parse_scenario(io::read_text_file(scenario_path));
        if (seed) scn.seed = *seed;
        SynthOutput gen = synth_generate(scn);
        trace = std::move(gen.trace);
        lm = std::move(gen.landmarks);
        truth = std::move(gen.truth);
    } else {
        trace = io::parse_roi_trace(io::read_text_file(trace_path));
        if (!lm_path.empty()) lm = io::parse_landmarks(io::read_text_file(lm_path));
        truth = io::parse_ground_truth(io::read_text_file(truth_path));
    }

    SessionInputs in;
    in.trace = &trace;
    if (lm) in.landmarks = &*lm;
    const PipelineConfig cfg = resolve_config(c);
    if (c.verbose) print_config(cfg);
    const auto exec = c.serial ? kernels::Exec::Serial : kernels::Exec::Parallel;

    fs::create_directories(out_dir);
    std::vector<std::pair<std::string, MetricsReport>> reports;
    for (Variant v : variants) {
        const SessionResult res = run_variant(v, in, cfg, exec);
        const std::string name = to_string(v);
        io::write_text_file(fs::path(out_dir) / (name + "_windows.csv"),
                            window_table_csv(res.estimates, truth));
        std::string pred = "window,bpm\n", actual = "window,bpm\n";
        for (const HrEstimate& e : res.estimates) {
            pred += io::fmt_int(e.window) + "," + io::fmt_int(e.hr_bpm) + "\n";
            actual += io::fmt_int(e.window) + "," +
                      io::fmt_double(interp_truth(truth, e.time_s)) + "\n";
        }
        io::write_text_file(fs::path(out_dir) / (name + "_pred.csv"), pred);
        io::write_text_file(fs::path(out_dir) / (name + "_actual.csv"), actual);
        reports.emplace_back(name, compute_metrics(res, truth));
    }
    io::write_text_file(fs::path(out_dir) / "summary.json", metrics_json(reports));
    return 0;
}

int run_metrics(const std::string& est_path, const std::string& truth_path,
                const std::string& out_path) {
    const std::vector<HrEstimate> ests = parse_estimates_csv(io::read_text_file(est_path));
    const GroundTruth truth = io::parse_ground_truth(io::read_text_file(truth_path));
    std::vector<double> centers;
    centers.reserve(ests.size());
    for (const HrEstimate& e : ests) centers.push_back(e.time_s);
    const MetricsReport rep = compute_metrics_at(ests, truth, centers);
    emit(out_path, metrics_json({{"all", rep}}));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"heart-rate estimation from facial ROI traces and landmarks"};
    app.require_subcommand(1);

    std::string est_trace, est_lm, est_out;
    ConfigCli est_cfg;
    CLI::App* est = app.add_subcommand("estimate", "per-window heart rate from a ROI trace");
    est->add_option("--trace", est_trace, "ROI trace CSV")->required();
    est->add_option("--landmarks", est_lm, "3-D landmark track CSV (enables quality weighting)");
    add_variant_option(est, est_cfg);
    add_config_options(est, est_cfg, false);
    est->add_option("--out", est_out, "output CSV path (default: standard output)");

    std::string frm_dir, frm_lm, frm_out;
    ConfigCli frm_cfg;
    CLI::App* frm = app.add_subcommand("frames", "per-window heart rate from raw frames");
    frm->add_option("--dir", frm_dir, "directory of frame_%06d.ppm and optional mask_%06d.pgm")
        ->required();
    frm->add_option("--landmarks", frm_lm, "3-D landmark track CSV");
    add_variant_option(frm, frm_cfg);
    add_config_options(frm, frm_cfg, true);
    frm->add_option("--out", frm_out, "output CSV path (default: standard output)");

    std::string syn_scenario, syn_out;
    std::uint64_t syn_seed = 0;
    CLI::App* syn = app.add_subcommand("synth", "generate a synthetic session from a scenario");
    syn->add_option("--scenario", syn_scenario, "scenario description file")->required();
    CLI::Option* syn_seed_opt = syn->add_option("--seed", syn_seed, "override the scenario seed");
    syn->add_option("--out", syn_out, "output directory for trace/landmarks/truth CSVs")
        ->required();

    std::string ben_scenario, ben_trace, ben_lm, ben_truth, ben_out;
    std::string ben_variants =
        "NorSysR,NorSysI,NorSys,PulseModP,PulseModL,PulseMod,BayTrack,MOMBAT";
    std::uint64_t ben_seed = 0;
    ConfigCli ben_cfg;
    CLI::App* ben = app.add_subcommand("bench", "run pipeline variants and score them");
    ben->add_option("--scenario", ben_scenario, "scenario description file");
    ben->add_option("--trace", ben_trace, "ROI trace CSV (alternative to --scenario)")
        ->excludes("--scenario");
    ben->add_option("--landmarks", ben_lm, "3-D landmark track CSV");
    ben->add_option("--truth", ben_truth, "ground-truth HR CSV, required with --trace");
    ben->add_option("--variants", ben_variants, "comma-separated variant list")
        ->default_str(ben_variants);
    CLI::Option* ben_seed_opt = ben->add_option("--seed", ben_seed, "override the scenario seed");
    add_config_options(ben, ben_cfg, true);
    ben->add_option("--out", ben_out, "output directory")->required();

    std::string met_est, met_truth, met_out;
    CLI::App* met = app.add_subcommand("metrics", "score an estimate CSV against ground truth");
    met->add_option("--estimates", met_est, "estimate CSV from estimate/frames")->required();
    met->add_option("--truth", met_truth, "ground-truth HR CSV")->required();
    met->add_option("--out", met_out, "output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand(est)) return run_estimate(est_trace, est_lm, est_cfg, est_out);
        if (app.got_subcommand(frm)) return run_frames(frm_dir, frm_lm, frm_cfg, frm_out);
        if (app.got_subcommand(syn))
            return run_synth(syn_scenario,
                             syn_seed_opt->count() ? std::optional<std::uint64_t>(syn_seed)
                                                   : std::nullopt,
                             syn_out);
        if (app.got_subcommand(ben))
            return run_bench(ben_scenario, ben_trace, ben_lm, ben_truth, ben_variants,
                             ben_seed_opt->count() ? std::optional<std::uint64_t>(ben_seed)
                                                   : std::nullopt,
                             ben_cfg, ben_out);
        if (app.got_subcommand(met)) return run_metrics(met_est, met_truth, met_out);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.msg.c_str());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
