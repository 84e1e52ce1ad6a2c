#include "mosaic/canvas.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mosaic {

Point2 BinMapping::to_canvas(Point2 p) const {
    return {dest.x_min + (p.x - source.x_min) * scale_x(), dest.y_min + (p.y - source.y_min) * scale_y()};
}

Point2 BinMapping::to_source(Point2 p) const {
    return {source.x_min + (p.x - dest.x_min) / scale_x(), source.y_min + (p.y - dest.y_min) / scale_y()};
}

BBox BinMapping::to_canvas(const BBox& b) const {
    const Point2 lo = to_canvas(Point2{b.x_min, b.y_min});
    const Point2 hi = to_canvas(Point2{b.x_max, b.y_max});
    return {lo.x, lo.y, hi.x, hi.y};
}

BBox BinMapping::to_source(const BBox& b) const {
    const Point2 lo = to_source(Point2{b.x_min, b.y_min});
    const Point2 hi = to_source(Point2{b.x_max, b.y_max});
    return {lo.x, lo.y, hi.x, hi.y};
}

BinMapping mapping_for(const Placement& p) {
    if (p.source.width() <= 0.0 || p.source.height() <= 0.0 || p.w <= 0 || p.h <= 0) {
        throw std::invalid_argument("mapping_for: placement without area");
    }
    return {p.source, p.dest()};
}

GrayFrame resample_bilinear(const GrayFrame& src, const BBox& src_box, int out_w, int out_h) {
    GrayFrame out(out_w, out_h);
    if (src.empty() || out_w == 0 || out_h == 0) return out;
    const double step_x = src_box.width() / out_w;
    const double step_y = src_box.height() / out_h;
    const double lo_x = std::max(0.0, src_box.x_min);
    const double lo_y = std::max(0.0, src_box.y_min);
    const double hi_x = std::min<double>(src.width - 1, src_box.x_max - 1.0);
    const double hi_y = std::min<double>(src.height - 1, src_box.y_max - 1.0);

    std::vector<int> x0(out_w), x1(out_w);
    std::vector<double> fx(out_w);
    for (int u = 0; u < out_w; ++u) {
        const double sx = std::clamp(src_box.x_min + (u + 0.5) * step_x - 0.5, lo_x, std::max(lo_x, hi_x));
        x0[u] = static_cast<int>(std::floor(sx));
        x1[u] = std::min(x0[u] + 1, src.width - 1);
        fx[u] = sx - x0[u];
    }
    for (int v = 0; v < out_h; ++v) {
        const double sy = std::clamp(src_box.y_min + (v + 0.5) * step_y - 0.5, lo_y, std::max(lo_y, hi_y));
        const int y0 = static_cast<int>(std::floor(sy));
        const int y1 = std::min(y0 + 1, src.height - 1);
        const double fy = sy - y0;
        const std::uint8_t* r0 = &src.data[static_cast<std::size_t>(y0) * src.width];
        const std::uint8_t* r1 = &src.data[static_cast<std::size_t>(y1) * src.width];
        std::uint8_t* dst = &out.data[static_cast<std::size_t>(v) * out_w];
        for (int u = 0; u < out_w; ++u) {
            const double top = r0[x0[u]] + (r0[x1[u]] - r0[x0[u]]) * fx[u];
            const double bottom = r1[x0[u]] + (r1[x1[u]] - r1[x0[u]]) * fx[u];
            dst[u] = static_cast<std::uint8_t>(top + (bottom - top) * fy + 0.5);
        }
    }
    return out;
}

CanvasFrame describe(const CanvasLayout& layout) {
    CanvasFrame f;
    f.layout = layout;
    f.mapping.reserve(layout.placements.size());
    for (const Placement& p : layout.placements) f.mapping.push_back(mapping_for(p));
    return f;
}

CanvasFrame compose(const CanvasLayout& layout, std::span<const GrayFrame> sources) {
    CanvasFrame f = describe(layout);
    f.raster = GrayFrame(layout.canvas, layout.canvas, kGutterValue);
    for (const Placement& p : layout.placements) {
        if (p.camera_id < 0 || static_cast<std::size_t>(p.camera_id) >= sources.size() ||
            sources[static_cast<std::size_t>(p.camera_id)].empty()) {
            throw std::invalid_argument("compose: no source frame for camera " + std::to_string(p.camera_id));
        }
        const GrayFrame tile = resample_bilinear(sources[static_cast<std::size_t>(p.camera_id)], p.source, p.w, p.h);
        for (int v = 0; v < p.h; ++v) {
            const int y = p.y + v;
            if (y < 0 || y >= layout.canvas) continue;
            for (int u = 0; u < p.w; ++u) {
                const int x = p.x + u;
                if (x < 0 || x >= layout.canvas) continue;
                f.raster.at(x, y) = tile.at(u, v);
            }
        }
    }
    return f;
}

int bin_at(const CanvasFrame& frame, Point2 p) {
    for (std::size_t i = 0; i < frame.mapping.size(); ++i) {
        const BBox& d = frame.mapping[i].dest;
        if (p.x >= d.x_min && p.x < d.x_max && p.y >= d.y_min && p.y < d.y_max) return static_cast<int>(i);
    }
    return -1;
}

TranslationResult translate_back(std::span<const Detection> canvas_dets, const CanvasFrame& frame) {
    TranslationResult out;
    for (const Detection& d : canvas_dets) {
        const int bin = bin_at(frame, d.bbox.center());
        if (bin < 0) {
            ++out.dropped;
            continue;
        }
        const BinMapping& m = frame.mapping[static_cast<std::size_t>(bin)];
        Detection t = d;
        t.bbox = clamp_to(m.to_source(d.bbox), m.source);
        t.camera_id = frame.layout.placements[static_cast<std::size_t>(bin)].camera_id;
        t.render_scale = m.scale_y();
        out.per_camera[t.camera_id].push_back(std::move(t));
    }
    return out;
}

std::map<int, std::vector<Detection>> dedupe(const std::map<int, std::vector<Detection>>& per_camera,
                                             double iou_threshold) {
    std::map<int, std::vector<Detection>> out;
    for (const auto& [cam, dets] : per_camera) {
        std::map<std::string, std::vector<std::size_t>> by_class;
        for (std::size_t i = 0; i < dets.size(); ++i) by_class[dets[i].label].push_back(i);
        auto& kept = out[cam];
        for (const auto& [label, idx] : by_class) {
            std::vector<ScoredBox> boxes;
            boxes.reserve(idx.size());
            for (std::size_t i : idx) boxes.push_back({dets[i].bbox, dets[i].confidence});
            for (std::size_t s : nms_indices(boxes, iou_threshold)) kept.push_back(dets[idx[s]]);
        }
    }
    return out;
}

}  // namespace mosaic
