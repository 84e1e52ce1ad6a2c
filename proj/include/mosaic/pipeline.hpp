#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mosaic/canvas.hpp"
#include "mosaic/motion.hpp"
#include "mosaic/packer.hpp"
#include "mosaic/scale_profiler.hpp"
#include "mosaic/setcover.hpp"
#include "mosaic/simulation.hpp"
#include "mosaic/tiling.hpp"

namespace mosaic {

/// Detector latency per batch, keyed by (canvas side, batch size). Batch sizes
/// missing from the table are interpolated linearly between the nearest entries
/// for that canvas side (or extrapolated from the two closest).
class LatencyTable {
public:
    static LatencyTable defaults();
    void set(int canvas, int batch, double seconds);
    double lookup(int canvas, int batch) const;
    const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

private:
    std::map<std::pair<int, int>, double> entries_;
};

struct PipelineConfig {
    int cameras = 1;
    int canvas = 640;
    int batch = 4;
    int ps_frames = 10;
    double ps_period = 30.0;  // seconds
    double fps = 30.0;
    std::optional<double> batch_latency;        // defaults to the latency table
    std::optional<double> construction_budget;  // defaults to the batch latency
    double overlap = 0.25;
    GoodnessCriteria goodness;
    AppProfile profile = AppProfile::detection;
    DeParams de;
    TrackerConfig tracker;
    int diff_threshold = 25;
    int min_mask_area = 64;
    double nms_iou = 0.45;
    double merge_gap = 8.0;
    int k_max = 6;
    double stationary_threshold = 20.0;
    double visibility = 0.5;
    DetectorModel detector;
    bool strict = false;
    int threads = 1;

    double latency() const;
    double budget() const;
    int ps_period_frames() const;
    void validate() const;
};

struct Throughput {
    double canvas_fps = 0.0;
    double per_camera_fps = 0.0;
    double cfps = 0.0;
    double ps_delay = 0.0;  // seconds spent on full-frame inference per period
};

/// Throws when the full-frame inference of one period does not fit inside the period.
Throughput effective_throughput(int cameras, int batch, double batch_latency, int ps_frames, double ps_period);
Throughput effective_throughput(const PipelineConfig& cfg);

struct Timeline {
    double makespan = 0.0;
    double canvas_fps = 0.0;
    double detector_idle = 0.0;  // time the detector waited for a batch
};

/// Two-stage pipeline: batch i+1 is built while batch i is in the detector.
Timeline simulate_timeline(const std::vector<double>& construction_seconds, int batch, double batch_latency);

struct PsResult {
    std::vector<ScaleSet> scales;                               // per camera
    std::vector<std::map<int, std::vector<Detection>>> frames;  // per window frame, detections per camera
    int tracks = 0;
    int stationary = 0;
};

struct MosStepResult {
    std::map<int, std::vector<Detection>> detections;
    CanvasFrame canvas;
    std::vector<TileChoice> chosen;
    std::vector<BBox> masks;  // all cameras, for auditing
    double construction_seconds = 0.0;
    int dropped = 0;
    int degraded_masks = 0;
    int coverage_misses = 0;
    int admission_events = 0;
};

/// Full-frame detection of one camera frame through a letterboxed canvas.
std::vector<Detection> detect_full_frame(const Scenario& s, int camera, int frame, const PipelineConfig& cfg);

/// PS and MoS state for every camera of one scenario.
class MosaicEngine {
public:
    MosaicEngine(const Scenario& scenario, PipelineConfig cfg);

    /// Full-frame inference on `count` frames from `start`, then scale profiling and tracker refresh.
    PsResult run_ps_cycle(int start, int count);

    /// One canvas for frame `t`. Throws AdmissionControlError in strict mode.
    MosStepResult run_mos_step(int t);

    const std::vector<ScaleSet>& scales() const { return scales_; }
    const CameraTracker& tracker(int camera) const { return trackers_[static_cast<std::size_t>(camera)]; }
    int active_cameras() const { return active_; }
    const PipelineConfig& config() const { return cfg_; }

private:
    const GrayFrame& frame(int camera, int t);

    const Scenario& scenario_;
    PipelineConfig cfg_;
    std::vector<ScaleSet> scales_;
    std::vector<CameraTracker> trackers_;
    std::vector<std::map<int, GrayFrame>> cache_;
    int active_;
};

struct ProbeRecord {
    int cameras = 0;
    double median_construction = 0.0;  // seconds per canvas
    bool within_budget = false;
    bool sizing_ok = false;  // packed without relaxation on every probe frame
};

struct MaxCamerasResult {
    int max_cameras = 0;
    std::vector<ProbeRecord> probes;
    std::string advice;
};

/// Largest M whose b canvases build within the budget and whose tiles pack
/// without relaxation, probing M = 1, 2, ... on scenarios from `spec`.
MaxCamerasResult compute_max_cameras(const PipelineConfig& cfg, ScenarioSpec spec, std::uint64_t seed,
                                     int probe_frames = 12, int limit = 16);

double median(std::vector<double> values);

}  // namespace mosaic
