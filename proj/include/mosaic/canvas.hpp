#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "mosaic/geometry.hpp"
#include "mosaic/image.hpp"
#include "mosaic/packer.hpp"

namespace mosaic {

inline constexpr std::uint8_t kGutterValue = 114;

/// Per-axis affine map from a source crop onto its canvas bin.
struct BinMapping {
    BBox source;
    BBox dest;

    double scale_x() const { return dest.width() / source.width(); }
    double scale_y() const { return dest.height() / source.height(); }
    Point2 to_canvas(Point2 p) const;
    Point2 to_source(Point2 p) const;
    BBox to_canvas(const BBox& b) const;
    BBox to_source(const BBox& b) const;
};

BinMapping mapping_for(const Placement& p);

struct CanvasFrame {
    CanvasLayout layout;
    GrayFrame raster;
    std::vector<BinMapping> mapping;  // parallel to layout.placements
};

struct Detection {
    BBox bbox;
    std::string label;
    double confidence = 0.0;
    int camera_id = 0;
    double render_scale = 1.0;  // vertical canvas/source scale of the bin it came from
};

/// Bilinear resample of the crop `src_box` of `src` to out_w x out_h.
GrayFrame resample_bilinear(const GrayFrame& src, const BBox& src_box, int out_w, int out_h);

/// Renders the canvas raster. `sources` is indexed by camera id.
CanvasFrame compose(const CanvasLayout& layout, std::span<const GrayFrame> sources);

/// Canvas frame with mappings but no raster, for pipelines that never read pixels.
CanvasFrame describe(const CanvasLayout& layout);

/// Index of the bin whose half-open region [x, x+w) x [y, y+h) holds p, or -1.
int bin_at(const CanvasFrame& frame, Point2 p);

struct TranslationResult {
    std::map<int, std::vector<Detection>> per_camera;
    int dropped = 0;  // centre fell in the gutter
};

TranslationResult translate_back(std::span<const Detection> canvas_dets, const CanvasFrame& frame);

/// Non-maximum suppression per camera and per class.
std::map<int, std::vector<Detection>> dedupe(const std::map<int, std::vector<Detection>>& per_camera,
                                             double iou_threshold = 0.45);

}  // namespace mosaic
