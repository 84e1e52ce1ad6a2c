#include "mosaic/metrics.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <tuple>

namespace mosaic {

std::optional<double> average_precision(std::span<const EvalImage> images, std::string_view label,
                                        double iou_threshold) {
    struct Ranked {
        double confidence;
        std::size_t image;
        BBox box;
    };
    std::vector<Ranked> ranked;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        for (const auto& g : images[i].truth) positives += g.label == label;
        for (const auto& d : images[i].detections) {
            if (d.label == label) ranked.push_back({d.confidence, i, d.bbox});
        }
    }
    if (positives == 0) return std::nullopt;

    // Canonical order so the result does not depend on input order.
    std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return std::tie(a.image, a.box.x_min, a.box.y_min, a.box.x_max, a.box.y_max) <
               std::tie(b.image, b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max);
    });

    std::vector<std::vector<bool>> used(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) used[i].assign(images[i].truth.size(), false);

    std::vector<double> precision;
    std::vector<double> recall;
    std::size_t tp = 0;
    for (std::size_t k = 0; k < ranked.size(); ++k) {
        const auto& truth = images[ranked[k].image].truth;
        double best = iou_threshold;
        std::size_t match = truth.size();
        for (std::size_t g = 0; g < truth.size(); ++g) {
            if (truth[g].label != label || used[ranked[k].image][g]) continue;
            const double o = iou(ranked[k].box, truth[g].bbox);
            if (o >= best) {
                best = o;
                match = g;
            }
        }
        if (match < truth.size()) {
            used[ranked[k].image][match] = true;
            ++tp;
        }
        precision.push_back(double(tp) / double(k + 1));
        recall.push_back(double(tp) / double(positives));
    }

    for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
        ap += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return ap;
}

std::optional<double> map50(std::span<const EvalImage> images) {
    std::set<std::string> labels;
    for (const auto& img : images) {
        for (const auto& g : img.truth) labels.insert(g.label);
    }
    if (labels.empty()) return std::nullopt;
    double sum = 0.0;
    for (const auto& l : labels) sum += *average_precision(images, l);
    return sum / double(labels.size());
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

double cer(std::string_view predicted, std::string_view truth) {
    if (truth.empty()) throw std::invalid_argument("cer: empty reference text");
    return double(levenshtein(predicted, truth)) / double(truth.size());
}

PackingStats packing_stats(const CanvasLayout& layout, std::span<const TileChoice> chosen, int dropped_dets) {
    PackingStats s;
    s.utilization = layout.utilization();
    s.tiles = static_cast<int>(layout.placements.size());
    s.relaxations = layout.relaxations;
    s.dropped_dets = dropped_dets;
    double placed = 0.0;
    double inner_waste = 0.0;
    for (const Placement& p : layout.placements) {
        placed += double(p.w) * p.h;
        for (const TileChoice& c : chosen) {
            if (c.tile.camera_id == p.camera_id && c.tile.id == p.tile_id) {
                inner_waste += c.cost * (double(p.w) * p.h) / std::max(1.0, c.tile.bbox.area());
                break;
            }
        }
    }
    s.wasted_px = double(layout.canvas) * layout.canvas - placed + inner_waste;
    return s;
}

}  // namespace mosaic
