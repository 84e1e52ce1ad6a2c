#include <fstream>
#include <set>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "mosaic/experiment.hpp"
#include "mosaic/parallel.hpp"
#include "mosaic/pipeline.hpp"
#include "mosaic/simulation.hpp"

using nlohmann::json;
using namespace mosaic;

namespace {

constexpr const char* kVersion = "0.1.0";

json config_json(const RunConfig& c) {
    json j{{"mode", to_string(c.mode)}, {"preset", c.preset},       {"cameras", c.cameras},
           {"batch", c.batch},           {"canvas", c.canvas},       {"seed", c.seed},
           {"frames", c.frames},         {"profile", c.profile},     {"ps_frames", c.ps_frames},
           {"ps_period", c.ps_period},   {"strict", c.strict},       {"h0", c.h0},
           {"h1", c.h1},                 {"p_max", c.p_max},         {"deterministic", c.deterministic},
           {"ocr_height", c.ocr_height}};
    j["scenario"] = c.scenario_path.empty() ? json(nullptr) : json(c.scenario_path);
    j["latency"] = c.latency ? json(*c.latency) : json(nullptr);
    return j;
}

void apply_config(RunConfig& c, const json& raw) {
    const json& j = raw.contains("config") ? raw.at("config") : raw;
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    static const std::set<std::string> known{"mode",      "preset",    "scenario", "cameras", "batch",  "canvas",
                                             "seed",      "frames",    "profile",  "ps_frames", "ps_period",
                                             "latency",   "strict",    "h0",       "h1",      "p_max",
                                             "deterministic", "ocr_height"};
    for (const auto& [key, _] : j.items()) {
        if (!known.count(key)) throw std::invalid_argument("unknown config key: " + key);
    }
    if (j.contains("mode")) c.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("preset")) c.preset = j["preset"].get<std::string>();
    if (j.contains("scenario") && !j["scenario"].is_null()) c.scenario_path = j["scenario"].get<std::string>();
    if (j.contains("cameras")) c.cameras = j["cameras"].get<int>();
    if (j.contains("batch")) c.batch = j["batch"].get<int>();
    if (j.contains("canvas")) c.canvas = j["canvas"].get<int>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("frames")) c.frames = j["frames"].get<int>();
    if (j.contains("profile")) c.profile = j["profile"].get<std::string>();
    if (j.contains("ps_frames")) c.ps_frames = j["ps_frames"].get<int>();
    if (j.contains("ps_period")) c.ps_period = j["ps_period"].get<double>();
    if (j.contains("latency")) c.latency = j["latency"].is_null() ? std::nullopt : std::optional(j["latency"].get<double>());
    if (j.contains("strict")) c.strict = j["strict"].get<bool>();
    if (j.contains("h0")) c.h0 = j["h0"].get<double>();
    if (j.contains("h1")) c.h1 = j["h1"].get<double>();
    if (j.contains("p_max")) c.p_max = j["p_max"].get<double>();
    if (j.contains("deterministic")) c.deterministic = j["deterministic"].get<bool>();
    if (j.contains("ocr_height")) c.ocr_height = j["ocr_height"].get<double>();
}

/// Flag values, applied on top of the config file only when given.
struct RunFlags {
    std::string config_path;
    std::string mode, preset, scenario, profile;
    int cameras = 0, batch = 0, canvas = 0, frames = 0, ps_frames = 0;
    std::uint64_t seed = 0;
    double ps_period = 0.0, latency = 0.0;
    bool strict = false;

    void add_to(CLI::App* app, bool with_mode) {
        app->add_option("--config", config_path, "JSON config or run manifest")->check(CLI::ExistingFile);
        if (with_mode) app->add_option("--mode", mode, "mosaic, fcfs or uniform");
        app->add_option("--preset", preset, "okutama-like or ufpr-like");
        app->add_option("--scenario", scenario, "scenario JSONL file")->check(CLI::ExistingFile);
        app->add_option("--cameras", cameras, "number of camera streams M");
        app->add_option("--batch", batch, "canvas frames per detector batch");
        app->add_option("--canvas", canvas, "canvas side in pixels");
        app->add_option("--seed", seed, "scenario and model seed");
        app->add_option("--frames", frames, "frames per camera");
        app->add_option("--profile", profile, "auto, detection or ocr");
        app->add_option("--ps-frames", ps_frames, "full-frame inference frames per period");
        app->add_option("--ps-period", ps_period, "PS period in seconds");
        app->add_option("--latency", latency, "detector latency per batch in seconds");
        app->add_flag("--strict", strict, "fail on admission control instead of shedding cameras");
    }

    RunConfig resolve(const CLI::App* app) const {
        RunConfig c;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            apply_config(c, json::parse(in));
        }
        auto given = [&](const char* name) {
            const CLI::Option* opt = app->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--mode")) c.mode = parse_mode(mode);
        if (given("--preset")) c.preset = preset;
        if (given("--scenario")) c.scenario_path = scenario;
        if (given("--cameras")) c.cameras = cameras;
        if (given("--batch")) c.batch = batch;
        if (given("--canvas")) c.canvas = canvas;
        if (given("--seed")) c.seed = seed;
        if (given("--frames")) c.frames = frames;
        if (given("--profile")) c.profile = profile;
        if (given("--ps-frames")) c.ps_frames = ps_frames;
        if (given("--ps-period")) c.ps_period = ps_period;
        if (given("--latency")) c.latency = latency;
        if (given("--strict")) c.strict = strict;
        c.validate();
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

json manifest_for(const RunConfig& c, const RunResult& r) {
    json cols = json::array();
    for (const auto& col : result_columns()) cols.push_back(col);
    return json{{"tool", "mosaic"},
                {"version", kVersion},
                {"schema", std::string(kResultsSchema)},
                {"columns", cols},
                {"config", config_json(c)},
                {"seeds", {{"scenario", c.seed}}},
                {"report",
                 {{"ps_frames", r.stats.ps_frames},
                  {"mos_frames", r.stats.mos_frames},
                  {"cameras_served", r.stats.cameras_served},
                  {"admission_events", r.stats.admission_events},
                  {"coverage_misses", r.stats.coverage_misses},
                  {"degraded_masks", r.stats.degraded_masks},
                  {"dropped_detections", r.stats.dropped_detections}}}};
}

int cmd_run(const CLI::App* app, const RunFlags& flags, const std::string& out_path, std::string manifest_path) {
    const RunConfig cfg = flags.resolve(app);
    const RunResult r = run_experiment(cfg, threads_from_env());
    std::ostringstream csv;
    write_results_header(csv);
    write_result_row(csv, r);
    write_text(out_path, csv.str());
    if (manifest_path.empty() && !out_path.empty() && out_path != "-") manifest_path = out_path + ".manifest.json";
    if (!manifest_path.empty()) write_text(manifest_path, manifest_for(cfg, r).dump(2) + "\n");
    if (!r.stats.construction_seconds.empty()) {
        std::cerr << "median canvas construction " << median(r.stats.construction_seconds) * 1e3 << " ms over "
                  << r.stats.construction_seconds.size() << " canvases\n";
    }
    if (r.stats.admission_events > 0) {
        std::cerr << "warning: admission control shed " << r.stats.admission_events << " camera(s); served "
                  << r.stats.cameras_served << " of " << cfg.cameras << "\n";
    }
    return 0;
}

int cmd_sweep(const CLI::App* app, const RunFlags& flags, const std::string& kind, int max_cameras,
              const std::vector<int>& canvases, const std::vector<double>& periods, const std::string& out_path) {
    const RunConfig base = flags.resolve(app);
    std::vector<RunConfig> runs;
    if (kind == "cameras") {
        for (int m = 1; m <= max_cameras; ++m) {
            for (Mode mode : {Mode::mosaic, Mode::fcfs, Mode::uniform}) {
                RunConfig c = base;
                c.mode = mode;
                c.cameras = m;
                runs.push_back(c);
            }
        }
    } else if (kind == "canvas") {
        for (int side : canvases) {
            for (Mode mode : {Mode::mosaic, Mode::uniform}) {
                RunConfig c = base;
                c.mode = mode;
                c.canvas = side;
                runs.push_back(c);
            }
        }
    } else if (kind == "ps-period") {
        for (double p : periods) {
            RunConfig c = base;
            c.mode = Mode::mosaic;
            c.ps_period = p;
            runs.push_back(c);
        }
    } else {
        throw std::invalid_argument("unknown sweep kind: " + kind);
    }
    std::vector<RunResult> results(runs.size());
    parallel_for(runs.size(), threads_from_env(), [&](std::size_t i) { results[i] = run_experiment(runs[i], 1); });
    std::ostringstream csv;
    write_sweep_header(csv);
    for (const auto& r : results) write_sweep_row(csv, r);
    write_text(out_path, csv.str());
    return 0;
}

int cmd_max_cameras(const CLI::App* app, const RunFlags& flags, int limit, int probe_frames,
                    std::optional<double> budget) {
    const RunConfig cfg = flags.resolve(app);
    const Scenario tiny = generate_scenario(preset_spec(cfg.preset, 1, 2), cfg.seed);
    PipelineConfig p = pipeline_config(cfg, tiny, threads_from_env());
    if (budget) p.construction_budget = *budget;
    const MaxCamerasResult r =
        compute_max_cameras(p, preset_spec(cfg.preset, limit, probe_frames), cfg.seed, probe_frames, limit);
    std::cout << "M,median_construction_ms,within_budget,sizing_ok\n";
    for (const auto& probe : r.probes) {
        std::cout << probe.cameras << ',' << probe.median_construction * 1e3 << ',' << probe.within_budget << ','
                  << probe.sizing_ok << '\n';
    }
    std::cout << "max_cameras=" << r.max_cameras << '\n';
    if (!r.advice.empty()) std::cout << "advice: " << r.advice << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-camera spatial multiplexing simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    RunFlags run_flags;
    std::string run_out = "-";
    std::string run_manifest;
    auto* run = app.add_subcommand("run", "run one mode over a scenario and write a results CSV");
    run_flags.add_to(run, true);
    run->add_option("--out", run_out, "results CSV path ('-' for stdout)");
    run->add_option("--manifest", run_manifest, "manifest path (default: <out>.manifest.json)");

    auto* scenario = app.add_subcommand("scenario", "scenario utilities");
    scenario->require_subcommand(1);
    std::string gen_preset = "okutama-like";
    std::string gen_out = "-";
    int gen_cameras = 1;
    int gen_frames = 300;
    std::uint64_t gen_seed = 7;
    auto* generate = scenario->add_subcommand("generate", "write a synthetic scenario as JSONL");
    generate->add_option("--preset", gen_preset, "okutama-like or ufpr-like");
    generate->add_option("--cameras", gen_cameras, "camera count");
    generate->add_option("--frames", gen_frames, "frames per camera");
    generate->add_option("--seed", gen_seed, "seed");
    generate->add_option("--out", gen_out, "output path ('-' for stdout)");

    RunFlags sweep_flags;
    std::string sweep_kind = "cameras";
    int sweep_max = 6;
    std::vector<int> sweep_canvases{320, 640, 960};
    std::vector<double> sweep_periods{10.0, 30.0, 60.0};
    std::string sweep_out = "-";
    auto* sweep = app.add_subcommand("sweep", "throughput/accuracy trade-off table");
    sweep_flags.add_to(sweep, false);
    sweep->add_option("--kind", sweep_kind, "cameras, canvas or ps-period");
    sweep->add_option("--max-cameras", sweep_max, "largest M for the cameras sweep");
    sweep->add_option("--canvas-sizes", sweep_canvases, "canvas sides for the canvas sweep")->delimiter(',');
    sweep->add_option("--ps-periods", sweep_periods, "PS periods (s) for the ps-period sweep")->delimiter(',');
    sweep->add_option("--out", sweep_out, "CSV path ('-' for stdout)");

    RunFlags max_flags;
    int max_limit = 12;
    int max_probe = 12;
    std::optional<double> max_budget;
    auto* maxcam = app.add_subcommand("max-cameras", "largest M meeting the construction and sizing constraints");
    max_flags.add_to(maxcam, false);
    maxcam->add_option("--limit", max_limit, "largest M to probe");
    maxcam->add_option("--probe-frames", max_probe, "MoS frames per probe");
    maxcam->add_option("--budget", max_budget, "construction budget in seconds (default: batch latency)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run, run_flags, run_out, run_manifest);
        if (generate->parsed()) {
            const Scenario s = generate_scenario(preset_spec(gen_preset, gen_cameras, gen_frames), gen_seed);
            std::ostringstream text;
            write_scenario(s, text);
            write_text(gen_out, text.str());
            return 0;
        }
        if (sweep->parsed()) {
            return cmd_sweep(sweep, sweep_flags, sweep_kind, sweep_max, sweep_canvases, sweep_periods, sweep_out);
        }
        if (maxcam->parsed()) return cmd_max_cameras(maxcam, max_flags, max_limit, max_probe, max_budget);
    } catch (const AdmissionControlError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
