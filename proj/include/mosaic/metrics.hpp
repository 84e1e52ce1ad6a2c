#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mosaic/canvas.hpp"
#include "mosaic/packer.hpp"
#include "mosaic/setcover.hpp"

namespace mosaic {

struct GroundTruthBox {
    BBox bbox;
    std::string label;
};

/// Detections and ground truth of one evaluated image (one camera frame).
struct EvalImage {
    std::vector<Detection> detections;
    std::vector<GroundTruthBox> truth;
};

/// Average precision at IoU 0.5 for one class with all-point interpolation;
/// empty when the class has no ground truth.
std::optional<double> average_precision(std::span<const EvalImage> images, std::string_view label,
                                        double iou_threshold = 0.5);

/// Mean AP over every class that has ground truth; empty when there is none.
std::optional<double> map50(std::span<const EvalImage> images);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Edit distance over truth length. Throws on empty truth.
double cer(std::string_view predicted, std::string_view truth);

struct PackingStats {
    double utilization = 0.0;
    double wasted_px = 0.0;  // gutter plus background inside placed tiles, in canvas pixels
    int tiles = 0;
    int relaxations = 0;
    int dropped_dets = 0;
};

/// `chosen` supplies per-tile wasted source pixels; entries are matched to placements by (camera, tile id).
PackingStats packing_stats(const CanvasLayout& layout, std::span<const TileChoice> chosen, int dropped_dets = 0);

}  // namespace mosaic
