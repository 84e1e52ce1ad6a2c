#include "mosaic/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "mosaic/baselines.hpp"
#include "mosaic/parallel.hpp"

namespace mosaic {

LatencyTable LatencyTable::defaults() {
    LatencyTable t;
    t.set(320, 1, 0.030);
    t.set(320, 4, 0.095);
    t.set(640, 1, 0.0526);
    t.set(640, 4, 0.170);
    t.set(960, 1, 0.110);
    t.set(960, 4, 0.380);
    return t;
}

void LatencyTable::set(int canvas, int batch, double seconds) {
    if (canvas <= 0 || batch <= 0 || !(seconds > 0.0)) throw std::invalid_argument("latency table: bad entry");
    entries_[{canvas, batch}] = seconds;
}

double LatencyTable::lookup(int canvas, int batch) const {
    if (const auto it = entries_.find({canvas, batch}); it != entries_.end()) return it->second;
    std::vector<std::pair<int, double>> row;
    for (const auto& [key, v] : entries_) {
        if (key.first == canvas) row.emplace_back(key.second, v);
    }
    if (row.size() < 2) {
        throw std::out_of_range("latency table: no entry for canvas " + std::to_string(canvas) + ", batch " +
                                std::to_string(batch));
    }
    std::size_t hi = 1;
    while (hi + 1 < row.size() && row[hi].first < batch) ++hi;
    const auto [b0, l0] = row[hi - 1];
    const auto [b1, l1] = row[hi];
    const double v = l0 + (l1 - l0) * (batch - b0) / double(b1 - b0);
    if (!(v > 0.0)) throw std::out_of_range("latency table: extrapolated latency is not positive");
    return v;
}

double PipelineConfig::latency() const {
    return batch_latency ? *batch_latency : LatencyTable::defaults().lookup(canvas, batch);
}

double PipelineConfig::budget() const { return construction_budget ? *construction_budget : latency(); }

int PipelineConfig::ps_period_frames() const { return std::max(1, static_cast<int>(std::lround(ps_period * fps))); }

void PipelineConfig::validate() const {
    if (cameras < 1 || canvas < 1 || batch < 1) throw std::invalid_argument("pipeline: cameras, canvas and batch must be positive");
    if (ps_frames < 0 || !(ps_period > 0.0) || !(fps > 0.0)) throw std::invalid_argument("pipeline: bad PS schedule");
    if (ps_frames > ps_period_frames()) throw std::invalid_argument("pipeline: more PS frames than frames per period");
    if (batch_latency && !(*batch_latency > 0.0)) throw std::invalid_argument("pipeline: latency must be positive");
    if (construction_budget && *construction_budget < 0.0) throw std::invalid_argument("pipeline: negative budget");
    detector.validate();
}

Throughput effective_throughput(int cameras, int batch, double batch_latency, int ps_frames, double ps_period) {
    if (cameras < 1 || batch < 1 || !(batch_latency > 0.0) || ps_frames < 0 || !(ps_period > 0.0)) {
        throw std::invalid_argument("throughput: invalid configuration");
    }
    Throughput t;
    t.canvas_fps = batch / batch_latency;
    t.ps_delay = ps_frames * cameras / t.canvas_fps;
    if (t.ps_delay >= ps_period) throw std::invalid_argument("throughput: PS inference does not fit in the period");
    t.per_camera_fps = (ps_frames + (ps_period - t.ps_delay) * t.canvas_fps) / ps_period;
    t.cfps = cameras * t.per_camera_fps;
    return t;
}

Throughput effective_throughput(const PipelineConfig& cfg) {
    return effective_throughput(cfg.cameras, cfg.batch, cfg.latency(), cfg.ps_frames, cfg.ps_period);
}

Timeline simulate_timeline(const std::vector<double>& construction_seconds, int batch, double batch_latency) {
    if (batch < 1 || !(batch_latency > 0.0)) throw std::invalid_argument("timeline: invalid batch or latency");
    Timeline t;
    if (construction_seconds.empty()) return t;
    double build_end = 0.0;
    double infer_start = 0.0;
    double infer_end = 0.0;
    for (std::size_t first = 0; first < construction_seconds.size(); first += static_cast<std::size_t>(batch)) {
        const std::size_t last = std::min(construction_seconds.size(), first + static_cast<std::size_t>(batch));
        double work = 0.0;
        for (std::size_t i = first; i < last; ++i) work += construction_seconds[i];
        // The builder may run at most one batch ahead of the detector.
        const double build_start = first == 0 ? 0.0 : std::max(build_end, infer_start);
        build_end = build_start + work;
        const double start = std::max(build_end, infer_end);
        t.detector_idle += start - infer_end;
        infer_start = start;
        infer_end = start + batch_latency;
    }
    t.makespan = infer_end;
    t.canvas_fps = construction_seconds.size() / t.makespan;
    return t;
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::uint64_t frame_key(int t, int camera, std::uint64_t salt) {
    return mix_key({static_cast<std::uint64_t>(t), static_cast<std::uint64_t>(camera), salt});
}

}  // namespace

std::vector<Detection> detect_full_frame(const Scenario& s, int camera, int frame, const PipelineConfig& cfg) {
    const CameraInfo& info = s.cameras.at(static_cast<std::size_t>(camera));
    const CanvasFrame canvas = describe(fcfs_layout(info.width, info.height, cfg.canvas, camera));
    const FrameRecord& rec = s.record(camera, frame);
    const auto visible = visible_objects(canvas, std::span<const FrameRecord>(&rec, 1), cfg.visibility);
    const auto dets = mock_detect(visible, cfg.detector, frame_key(frame, camera, 0xf00d));
    auto per_camera = dedupe(translate_back(dets, canvas).per_camera, cfg.nms_iou);
    return std::move(per_camera[camera]);
}

MosaicEngine::MosaicEngine(const Scenario& scenario, PipelineConfig cfg)
    : scenario_(scenario), cfg_(std::move(cfg)), active_(0) {
    cfg_.validate();
    if (cfg_.cameras > scenario.camera_count()) throw std::invalid_argument("engine: scenario has too few cameras");
    active_ = cfg_.cameras;
    scales_.assign(static_cast<std::size_t>(cfg_.cameras), ScaleSet{{}, kFallbackCatchAll});
    trackers_.assign(static_cast<std::size_t>(cfg_.cameras), CameraTracker(cfg_.tracker));
    cache_.resize(static_cast<std::size_t>(cfg_.cameras));
}

const GrayFrame& MosaicEngine::frame(int camera, int t) {
    auto& cache = cache_[static_cast<std::size_t>(camera)];
    if (auto it = cache.find(t); it != cache.end()) return it->second;
    while (!cache.empty() && cache.begin()->first < t - 1) cache.erase(cache.begin());
    return cache.emplace(t, render_frame(scenario_, camera, t)).first->second;
}

PsResult MosaicEngine::run_ps_cycle(int start, int count) {
    PsResult out;
    const int end = std::min(scenario_.frame_count(), start + count);
    const int m = cfg_.cameras;
    for (int t = start; t < end; ++t) {
        auto& per_cam = out.frames.emplace_back();
        for (int c = 0; c < m; ++c) per_cam[c] = detect_full_frame(scenario_, c, t, cfg_);
    }

    out.scales.resize(static_cast<std::size_t>(m));
    parallel_for(static_cast<std::size_t>(m), cfg_.threads, [&](std::size_t ci) {
        const int c = static_cast<int>(ci);
        std::vector<BBox> boxes;
        for (const auto& f : out.frames) {
            for (const auto& d : f.at(c)) boxes.push_back(d.bbox);
        }
        if (boxes.empty()) {
            out.scales[ci] = ScaleSet{{}, kFallbackCatchAll};
        } else {
            const auto samples = merge_proximal_boxes(boxes, cfg_.merge_gap);
            const auto clusters = cluster_sizes(samples, cfg_.k_max);
            out.scales[ci] = derive_scales(clusters.centroids);
        }

        // Track through the window, keeping ego-compensated centroid histories.
        CameraTracker window(cfg_.tracker);
        std::map<int, std::vector<Point2>> history;
        for (std::size_t k = 0; k < out.frames.size(); ++k) {
            const int t = start + static_cast<int>(k);
            std::vector<BBox> obs;
            for (const auto& d : out.frames[k].at(c)) obs.push_back(d.bbox);
            std::optional<Affine2D> ego;
            if (k > 0) {
                const auto matches = ego_correspondences(scenario_, c, t);
                ego = estimate_partial_affine(matches, true);
                for (auto& [id, pts] : history) {
                    for (Point2& p : pts) p = ego->apply(p);
                }
            }
            window.step(obs, ego);
            for (const Track& tr : window.tracks()) {
                if (tr.frames_since_update == 0) history[tr.id].push_back(tr.bbox.center());
            }
        }

        CameraTracker& fresh = trackers_[ci];
        fresh = CameraTracker(cfg_.tracker);
        for (const Track& tr : window.tracks()) {
            const auto& h = history[tr.id];
            if (h.empty()) continue;
            const TrackStatus status =
                h.size() >= 2 ? classify_stationary(h, cfg_.stationary_threshold) : TrackStatus::active;
            const Point2 v = status == TrackStatus::active ? tr.velocity() : Point2{};
            fresh.add_track(tr.bbox, status, v);
        }
    });

    for (int c = 0; c < m; ++c) {
        scales_[static_cast<std::size_t>(c)] = out.scales[static_cast<std::size_t>(c)];
        for (const Track& tr : trackers_[static_cast<std::size_t>(c)].tracks()) {
            ++out.tracks;
            out.stationary += tr.status == TrackStatus::stationary;
        }
    }
    return out;
}

MosStepResult MosaicEngine::run_mos_step(int t) {
    if (t < 1 || t >= scenario_.frame_count()) throw std::out_of_range("run_mos_step: frame index out of range");
    MosStepResult out;

    // Camera capture is not part of canvas construction.
    std::vector<GrayFrame> sources(static_cast<std::size_t>(cfg_.cameras));
    std::vector<const GrayFrame*> previous(static_cast<std::size_t>(cfg_.cameras));
    for (int c = 0; c < active_; ++c) {
        previous[static_cast<std::size_t>(c)] = &frame(c, t - 1);
        sources[static_cast<std::size_t>(c)] = frame(c, t);
    }

    const auto started = std::chrono::steady_clock::now();
    struct PerCamera {
        std::vector<BBox> masks;
        CameraSelection selection;
    };
    std::vector<PerCamera> per(static_cast<std::size_t>(active_));
    parallel_for(static_cast<std::size_t>(active_), cfg_.threads, [&](std::size_t ci) {
        const int c = static_cast<int>(ci);
        const CameraInfo& info = scenario_.cameras[ci];
        const auto obs = frame_diff_masks(*previous[ci], sources[ci], cfg_.diff_threshold, cfg_.min_mask_area);
        const auto matches = ego_correspondences(scenario_, c, t);
        const Affine2D ego = estimate_partial_affine(matches, true);
        const TrackerStepResult step = trackers_[ci].step(obs, ego);
        const BBox bounds{0.0, 0.0, double(info.width), double(info.height)};
        for (const BBox& m : step.mask_boxes) {
            const BBox clipped = clamp_to(m, bounds);
            if (clipped.width() >= 1.0 && clipped.height() >= 1.0) per[ci].masks.push_back(clipped);
        }
        const ScaleSet& scales = scales_[ci];
        const auto tiles = generate_tiles(info.width, info.height, scales, cfg_.overlap, c);
        const Assignment assignment = assign_masks(tiles, per[ci].masks, cfg_.goodness);
        per[ci].selection = select_tiles(tiles, per[ci].masks, assignment, scales.all(), cfg_.profile);
    });

    CanvasLayout layout;
    layout.canvas = cfg_.canvas;
    for (;;) {
        std::vector<PackItem> items;
        out.chosen.clear();
        for (int c = 0; c < active_; ++c) {
            for (const TileChoice& tc : per[static_cast<std::size_t>(c)].selection.chosen) {
                const double side = tc.tile.bbox.width();
                items.push_back({c, tc.tile.id, tc.tile.bbox, side, tc.tile.bbox.height(), tc.min_scale, tc.max_scale,
                                 tc.elasticity});
                out.chosen.push_back(tc);
            }
        }
        try {
            DeParams de = cfg_.de;
            de.threads = cfg_.threads;
            de.seed = mix_key({cfg_.de.seed, static_cast<std::uint64_t>(t)});
            layout = inverse_bin_pack(items, cfg_.canvas, de);
            break;
        } catch (const AdmissionControlError&) {
            if (cfg_.strict || active_ <= 1) throw;
            // Shed the highest camera id for this and all later canvases.
            --active_;
            ++out.admission_events;
            per.resize(static_cast<std::size_t>(active_));
        }
    }
    out.canvas = compose(layout, sources);
    out.construction_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::vector<FrameRecord> records;
    for (int c = 0; c < active_; ++c) {
        records.push_back(scenario_.record(c, t));
        out.masks.insert(out.masks.end(), per[static_cast<std::size_t>(c)].masks.begin(),
                         per[static_cast<std::size_t>(c)].masks.end());
        out.degraded_masks += per[static_cast<std::size_t>(c)].selection.degraded_masks;
    }
    const auto visible = visible_objects(out.canvas, records, cfg_.visibility);
    const auto dets = mock_detect(visible, cfg_.detector, frame_key(t, -1, 0xca5e));
    TranslationResult tr = translate_back(dets, out.canvas);
    out.dropped = tr.dropped;
    out.detections = dedupe(tr.per_camera, cfg_.nms_iou);

    // Coverage audit: objects touched by a mask must sit in some packed tile.
    for (int c = 0; c < active_; ++c) {
        for (const GtObject& o : records[static_cast<std::size_t>(c)].objects) {
            const auto& masks = per[static_cast<std::size_t>(c)].masks;
            const bool touched = std::any_of(masks.begin(), masks.end(),
                                             [&](const BBox& m) { return intersection_area(m, o.bbox) > 0.0; });
            if (!touched) continue;
            const bool packed = std::any_of(layout.placements.begin(), layout.placements.end(), [&](const Placement& p) {
                return p.camera_id == c && intersection_area(p.source, o.bbox) >= cfg_.visibility * o.bbox.area();
            });
            out.coverage_misses += !packed;
        }
    }
    return out;
}

MaxCamerasResult compute_max_cameras(const PipelineConfig& cfg, ScenarioSpec spec, std::uint64_t seed,
                                     int probe_frames, int limit) {
    MaxCamerasResult out;
    const double budget = cfg.budget();
    if (!(budget > 0.0)) {
        out.advice = "construction budget is zero; process streams FCFS";
        return out;
    }
    spec.cameras = limit;
    spec.frames = cfg.ps_frames + probe_frames + 1;
    const Scenario scenario = generate_scenario(spec, seed);
    for (int m = 1; m <= limit; ++m) {
        PipelineConfig probe_cfg = cfg;
        probe_cfg.cameras = m;
        probe_cfg.strict = true;
        MosaicEngine engine(scenario, probe_cfg);
        engine.run_ps_cycle(0, cfg.ps_frames);
        ProbeRecord rec;
        rec.cameras = m;
        rec.sizing_ok = true;
        std::vector<double> times;
        for (int t = std::max(1, cfg.ps_frames); t < scenario.frame_count(); ++t) {
            try {
                const MosStepResult r = engine.run_mos_step(t);
                times.push_back(r.construction_seconds);
                if (r.canvas.layout.relaxed) rec.sizing_ok = false;
            } catch (const AdmissionControlError&) {
                rec.sizing_ok = false;
            }
            if (!rec.sizing_ok) break;
        }
        rec.median_construction = median(times);
        rec.within_budget = cfg.batch * rec.median_construction <= budget;
        out.probes.push_back(rec);
        if (!rec.within_budget || !rec.sizing_ok) break;
        out.max_cameras = m;
    }
    if (out.max_cameras == 0) out.advice = "no camera count meets both constraints; process streams FCFS";
    return out;
}

}  // namespace mosaic
