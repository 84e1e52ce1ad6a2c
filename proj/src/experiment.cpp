#include "mosaic/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "mosaic/baselines.hpp"
#include "mosaic/metrics.hpp"

namespace mosaic {

Mode parse_mode(std::string_view name) {
    if (name == "mosaic") return Mode::mosaic;
    if (name == "fcfs") return Mode::fcfs;
    if (name == "uniform") return Mode::uniform;
    throw std::invalid_argument("unknown mode: " + std::string(name));
}

const char* to_string(Mode m) {
    switch (m) {
        case Mode::mosaic: return "mosaic";
        case Mode::fcfs: return "fcfs";
        case Mode::uniform: return "uniform";
    }
    return "?";
}

AppProfile RunConfig::resolved_profile() const {
    if (profile == "auto") return preset == "ufpr-like" ? AppProfile::ocr : AppProfile::detection;
    return parse_profile(profile);
}

void RunConfig::validate() const {
    if (cameras < 1 || batch < 1 || canvas < 16 || frames < 2) {
        throw std::invalid_argument("run: cameras, batch, canvas and frames must be positive (frames >= 2)");
    }
    if (ps_frames < 0 || !(ps_period > 0.0)) throw std::invalid_argument("run: bad PS schedule");
    if (latency && !(*latency > 0.0)) throw std::invalid_argument("run: latency must be positive");
    if (!(ocr_height > 0.0)) throw std::invalid_argument("run: OCR height must be positive");
    resolved_profile();
}

Scenario load_or_generate(const RunConfig& cfg) {
    if (!cfg.scenario_path.empty()) {
        std::ifstream in(cfg.scenario_path);
        if (!in) throw std::invalid_argument("cannot open scenario file " + cfg.scenario_path);
        return read_scenario(in);
    }
    return generate_scenario(preset_spec(cfg.preset, cfg.cameras, cfg.frames), cfg.seed);
}

PipelineConfig pipeline_config(const RunConfig& cfg, const Scenario& scenario, int threads) {
    PipelineConfig p;
    p.cameras = cfg.cameras;
    p.canvas = cfg.canvas;
    p.batch = cfg.batch;
    p.ps_frames = cfg.ps_frames;
    p.ps_period = cfg.ps_period;
    p.fps = scenario.cameras.empty() ? 30.0 : scenario.cameras.front().fps;
    p.batch_latency = cfg.latency;
    p.profile = cfg.resolved_profile();
    p.strict = cfg.strict;
    p.threads = threads;
    p.detector.h0 = cfg.h0;
    p.detector.h1 = cfg.h1;
    p.detector.p_max = cfg.p_max;
    p.detector.deterministic = cfg.deterministic;
    p.detector.seed = mix_key({cfg.seed, 0xde7ec7});
    p.de.seed = mix_key({cfg.seed, 0xde});
    return p;
}

namespace {

using FrameDetections = std::vector<std::map<int, std::vector<Detection>>>;  // [frame][camera]

double plate_cer(const GtObject& o, std::span<const Detection> dets, double h_ocr, std::uint64_t key) {
    const Detection* best = nullptr;
    double best_iou = 0.5;
    for (const Detection& d : dets) {
        const double v = iou(d.bbox, o.bbox);
        if (v >= best_iou) {
            best_iou = v;
            best = &d;
        }
    }
    if (!best) return 1.0;
    const double native = o.plate_bbox->height();
    const double rendered = std::min(native * best->render_scale, native);
    return cer(mock_ocr(rendered, o.plate, h_ocr, key), o.plate);
}

}  // namespace

RunResult run_experiment(const RunConfig& cfg, const Scenario& scenario, int threads) {
    cfg.validate();
    if (scenario.camera_count() < cfg.cameras) throw std::invalid_argument("run: scenario has fewer cameras than requested");
    const int m = cfg.cameras;
    const int frames = scenario.frame_count();
    if (frames < 2) throw std::invalid_argument("run: scenario needs at least two frames");
    const PipelineConfig pcfg = pipeline_config(cfg, scenario, threads);
    pcfg.validate();

    RunResult res;
    res.mode = cfg.mode;
    res.cameras = m;
    res.batch = cfg.batch;
    res.canvas = cfg.canvas;
    res.ps_period = cfg.ps_period;
    RunStats& st = res.stats;
    st.cameras_served = m;

    FrameDetections dets(static_cast<std::size_t>(frames));
    std::vector<double> utilization;
    const double canvas_fps = cfg.batch / pcfg.latency();

    switch (cfg.mode) {
        case Mode::fcfs: {
            for (int t = 0; t < frames; ++t) {
                for (int c = 0; c < m; ++c) dets[t][c] = detect_full_frame(scenario, c, t, pcfg);
            }
            for (int c = 0; c < m; ++c) {
                const CameraInfo& info = scenario.cameras[static_cast<std::size_t>(c)];
                utilization.push_back(fcfs_layout(info.width, info.height, cfg.canvas).utilization());
            }
            st.baseline_canvases = frames * m;
            res.per_camera_fps = canvas_fps / m;
            res.cfps = canvas_fps;
            break;
        }
        case Mode::uniform: {
            const CameraInfo& info = scenario.cameras.front();
            for (const CameraInfo& c : scenario.cameras) {
                if (c.width != info.width || c.height != info.height) {
                    throw std::invalid_argument("uniform mode needs equally sized camera frames");
                }
            }
            const CanvasFrame canvas = describe(uniform_layout(m, info.width, info.height, cfg.canvas));
            for (int t = 0; t < frames; ++t) {
                std::vector<FrameRecord> records;
                for (int c = 0; c < m; ++c) records.push_back(scenario.record(c, t));
                const auto visible = visible_objects(canvas, records, pcfg.visibility);
                const auto raw = mock_detect(visible, pcfg.detector, mix_key({static_cast<std::uint64_t>(t), 0x0f1f}));
                const TranslationResult tr = translate_back(raw, canvas);
                st.dropped_detections += tr.dropped;
                dets[t] = dedupe(tr.per_camera, pcfg.nms_iou);
            }
            utilization.push_back(canvas.layout.utilization());
            st.baseline_canvases = frames;
            res.per_camera_fps = canvas_fps;
            res.cfps = canvas_fps * m;
            break;
        }
        case Mode::mosaic: {
            MosaicEngine engine(scenario, pcfg);
            const int period = pcfg.ps_period_frames();
            for (int t = 0; t < frames;) {
                const int phase = t % period;
                if (phase < pcfg.ps_frames) {
                    const int count = std::min(pcfg.ps_frames - phase, frames - t);
                    const PsResult ps = engine.run_ps_cycle(t, count);
                    for (int k = 0; k < count; ++k) dets[t + k] = ps.frames[static_cast<std::size_t>(k)];
                    st.ps_frames += count;
                    t += count;
                    continue;
                }
                if (t == 0) {
                    ++t;
                    continue;
                }
                MosStepResult step = engine.run_mos_step(t);
                dets[t] = std::move(step.detections);
                st.mos_frames += 1;
                st.construction_seconds.push_back(step.construction_seconds);
                st.dropped_detections += step.dropped;
                st.coverage_misses += step.coverage_misses;
                st.degraded_masks += step.degraded_masks;
                st.relaxed_canvases += step.canvas.layout.relaxed;
                st.admission_events += step.admission_events;
                utilization.push_back(step.canvas.layout.utilization());
                ++t;
            }
            st.cameras_served = engine.active_cameras();
            const Throughput tp = effective_throughput(pcfg);
            res.per_camera_fps = tp.per_camera_fps;
            res.cfps = tp.cfps;
            break;
        }
    }

    std::vector<EvalImage> images;
    images.reserve(static_cast<std::size_t>(frames * m));
    double cer_sum = 0.0;
    int plates = 0;
    for (int t = 0; t < frames; ++t) {
        for (int c = 0; c < m; ++c) {
            EvalImage img;
            if (auto it = dets[t].find(c); it != dets[t].end()) img.detections = it->second;
            for (const GtObject& o : scenario.record(c, t).objects) {
                img.truth.push_back({o.bbox, o.label});
                if (!o.plate.empty() && o.plate_bbox) {
                    cer_sum += plate_cer(o, img.detections, cfg.ocr_height,
                                         mix_key({cfg.seed, static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(c),
                                                  static_cast<std::uint64_t>(o.id), 0x0c7}));
                    ++plates;
                }
            }
            images.push_back(std::move(img));
        }
    }
    res.map50 = map50(images);
    if (plates > 0) res.cer = cer_sum / plates;
    res.utilization = utilization.empty()
                          ? 0.0
                          : std::accumulate(utilization.begin(), utilization.end(), 0.0) / utilization.size();
    res.relaxations = st.relaxed_canvases;
    return res;
}

RunResult run_experiment(const RunConfig& cfg, int threads) { return run_experiment(cfg, load_or_generate(cfg), threads); }

const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols{"mode", "M", "b", "C", "map50", "per_camera_fps",
                                               "cfps", "cer", "utilization", "relaxations"};
    return cols;
}

namespace {

std::string fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : "NA"; }

}  // namespace

void write_results_header(std::ostream& out) {
    const auto& cols = result_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
}

void write_result_row(std::ostream& out, const RunResult& r) {
    out << to_string(r.mode) << ',' << r.cameras << ',' << r.batch << ',' << r.canvas << ',' << fixed(r.map50) << ','
        << fixed(r.per_camera_fps) << ',' << fixed(r.cfps) << ',' << fixed(r.cer) << ',' << fixed(r.utilization) << ','
        << r.relaxations << '\n';
}

void write_sweep_header(std::ostream& out) {
    out << "mode,M,b,C,ps_period,map50,per_camera_fps,cfps,cer,utilization,relaxations,cfps_x_map50\n";
}

void write_sweep_row(std::ostream& out, const RunResult& r) {
    out << to_string(r.mode) << ',' << r.cameras << ',' << r.batch << ',' << r.canvas << ',' << fixed(r.ps_period) << ','
        << fixed(r.map50) << ',' << fixed(r.per_camera_fps) << ',' << fixed(r.cfps) << ',' << fixed(r.cer) << ','
        << fixed(r.utilization) << ',' << r.relaxations << ','
        << (r.map50 ? fixed(r.cfps * *r.map50) : std::string("NA")) << '\n';
}

}  // namespace mosaic
