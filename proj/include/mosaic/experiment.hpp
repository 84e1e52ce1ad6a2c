#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mosaic/pipeline.hpp"
#include "mosaic/simulation.hpp"

namespace mosaic {

enum class Mode { mosaic, fcfs, uniform };
Mode parse_mode(std::string_view name);
const char* to_string(Mode m);

struct RunConfig {
    Mode mode = Mode::mosaic;
    std::string preset = "okutama-like";
    std::string scenario_path;  // overrides the preset when set
    int cameras = 6;
    int batch = 4;
    int canvas = 640;
    std::uint64_t seed = 7;
    int frames = 300;
    std::string profile = "auto";  // auto, detection or ocr
    int ps_frames = 10;
    double ps_period = 30.0;
    std::optional<double> latency;
    bool strict = false;
    double h0 = 12.0;
    double h1 = 32.0;
    double p_max = 0.98;
    bool deterministic = false;
    double ocr_height = kDefaultOcrHeight;

    AppProfile resolved_profile() const;
    void validate() const;
};

struct RunStats {
    int ps_frames = 0;
    int mos_frames = 0;
    int baseline_canvases = 0;
    std::vector<double> construction_seconds;
    int dropped_detections = 0;
    int coverage_misses = 0;
    int degraded_masks = 0;
    int relaxed_canvases = 0;
    int admission_events = 0;
    int cameras_served = 0;
};

struct RunResult {
    Mode mode = Mode::mosaic;
    int cameras = 0;
    int batch = 0;
    int canvas = 0;
    double ps_period = 0.0;
    std::optional<double> map50;
    double per_camera_fps = 0.0;
    double cfps = 0.0;
    std::optional<double> cer;
    double utilization = 0.0;
    int relaxations = 0;
    RunStats stats;
};

/// Scenario for a run: the file when given, otherwise the preset with `cameras` cameras.
Scenario load_or_generate(const RunConfig& cfg);

PipelineConfig pipeline_config(const RunConfig& cfg, const Scenario& scenario, int threads = 1);

RunResult run_experiment(const RunConfig& cfg, const Scenario& scenario, int threads = 1);
RunResult run_experiment(const RunConfig& cfg, int threads = 1);

inline constexpr std::string_view kResultsSchema = "mosaic-results/1";
const std::vector<std::string>& result_columns();
void write_results_header(std::ostream& out);
void write_result_row(std::ostream& out, const RunResult& r);

/// Sweep rows carry two extra columns: ps_period and cfps_x_map50.
void write_sweep_header(std::ostream& out);
void write_sweep_row(std::ostream& out, const RunResult& r);

}  // namespace mosaic
