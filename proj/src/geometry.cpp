#include "mosaic/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace mosaic {

bool intersects(const BBox& a, const BBox& b) {
    return a.x_min <= b.x_max && b.x_min <= a.x_max && a.y_min <= b.y_max && b.y_min <= a.y_max;
}

BBox intersection(const BBox& a, const BBox& b) {
    BBox r{std::max(a.x_min, b.x_min), std::max(a.y_min, b.y_min), std::min(a.x_max, b.x_max),
           std::min(a.y_max, b.y_max)};
    if (r.x_max < r.x_min) r.x_max = r.x_min;
    if (r.y_max < r.y_min) r.y_max = r.y_min;
    return r;
}

double intersection_area(const BBox& a, const BBox& b) {
    const double w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (w <= 0.0 || h <= 0.0) return 0.0;
    return w * h;
}

BBox enclose(const BBox& a, const BBox& b) {
    return {std::min(a.x_min, b.x_min), std::min(a.y_min, b.y_min), std::max(a.x_max, b.x_max),
            std::max(a.y_max, b.y_max)};
}

BBox clamp_to(const BBox& b, const BBox& bounds) {
    BBox r{std::clamp(b.x_min, bounds.x_min, bounds.x_max), std::clamp(b.y_min, bounds.y_min, bounds.y_max),
           std::clamp(b.x_max, bounds.x_min, bounds.x_max), std::clamp(b.y_max, bounds.y_min, bounds.y_max)};
    return r;
}

double iou(const BBox& a, const BBox& b) {
    const double inter = intersection_area(a, b);
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes, double iou_threshold) {
    std::vector<std::size_t> order(boxes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return boxes[a].confidence > boxes[b].confidence;
    });

    std::vector<std::size_t> keep;
    std::vector<bool> suppressed(boxes.size(), false);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t cur = order[i];
        if (suppressed[cur]) continue;
        keep.push_back(cur);
        for (std::size_t j = i + 1; j < order.size(); ++j) {
            const std::size_t other = order[j];
            if (!suppressed[other] && iou(boxes[cur].box, boxes[other].box) > iou_threshold) {
                suppressed[other] = true;
            }
        }
    }
    return keep;
}

std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold) {
    std::vector<ScoredBox> out;
    for (std::size_t idx : nms_indices(boxes, iou_threshold)) out.push_back(boxes[idx]);
    return out;
}

Point2 Affine2D::apply(Point2 p) const {
    const double c = std::cos(rotation);
    const double s = std::sin(rotation);
    return {scale * (c * p.x - s * p.y) + tx, scale * (s * p.x + c * p.y) + ty};
}

Affine2D Affine2D::inverse() const {
    Affine2D inv;
    inv.scale = 1.0 / scale;
    inv.rotation = -rotation;
    const Point2 t = Affine2D{inv.scale, inv.rotation, 0.0, 0.0}.apply({tx, ty});
    inv.tx = -t.x;
    inv.ty = -t.y;
    return inv;
}

Affine2D Affine2D::then(const Affine2D& next) const {
    Affine2D out;
    out.scale = scale * next.scale;
    out.rotation = rotation + next.rotation;
    const Point2 t = next.apply({tx, ty});
    out.tx = t.x;
    out.ty = t.y;
    return out;
}

BBox apply_affine(const Affine2D& t, const BBox& b) {
    const std::array<Point2, 4> corners{
        t.apply({b.x_min, b.y_min}), t.apply({b.x_max, b.y_min}),
        t.apply({b.x_min, b.y_max}), t.apply({b.x_max, b.y_max})};
    BBox out{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const Point2& p : corners) {
        out.x_min = std::min(out.x_min, p.x);
        out.y_min = std::min(out.y_min, p.y);
        out.x_max = std::max(out.x_max, p.x);
        out.y_max = std::max(out.y_max, p.y);
    }
    return out;
}

QuadTree::QuadTree(const BBox& region, std::span<const Entry> entries, int capacity, int max_depth)
    : capacity_(std::max(1, capacity)), max_depth_(std::max(0, max_depth)) {
    BBox root_region = region;
    for (const Entry& e : entries) root_region = enclose(root_region, e.box);
    root_ = std::make_unique<Node>();
    root_->region = root_region;
    for (const Entry& e : entries) {
        insert(*root_, e, 0);
        ++count_;
    }
}

namespace {

std::array<BBox, 4> quadrants(const BBox& r) {
    const Point2 c = r.center();
    return {BBox{r.x_min, r.y_min, c.x, c.y}, BBox{c.x, r.y_min, r.x_max, c.y},
            BBox{r.x_min, c.y, c.x, r.y_max}, BBox{c.x, c.y, r.x_max, r.y_max}};
}

}  // namespace

void QuadTree::insert(Node& node, const Entry& e, int depth) {
    if (!node.leaf()) {
        for (auto& child : node.children) {
            if (child->region.contains(e.box)) {
                insert(*child, e, depth + 1);
                return;
            }
        }
        node.entries.push_back(e);
        return;
    }
    node.entries.push_back(e);
    if (static_cast<int>(node.entries.size()) > capacity_ && depth < max_depth_) split(node, depth);
}

void QuadTree::split(Node& node, int depth) {
    const auto quads = quadrants(node.region);
    for (int i = 0; i < 4; ++i) {
        node.children[i] = std::make_unique<Node>();
        node.children[i]->region = quads[i];
    }
    std::vector<Entry> pending;
    pending.swap(node.entries);
    for (const Entry& e : pending) insert(node, e, depth);
}

void QuadTree::collect(const Node& node, const BBox& probe, std::vector<int>& out) const {
    if (!intersects(node.region, probe)) return;
    for (const Entry& e : node.entries) {
        if (intersects(e.box, probe)) out.push_back(e.id);
    }
    if (node.leaf()) return;
    for (const auto& child : node.children) collect(*child, probe, out);
}

std::vector<int> QuadTree::query(const BBox& probe) const {
    std::vector<int> out;
    collect(*root_, probe, out);
    std::sort(out.begin(), out.end());
    return out;
}

int QuadTree::depth_of(const Node& node) {
    if (node.leaf()) return 0;
    int d = 0;
    for (const auto& child : node.children) d = std::max(d, depth_of(*child));
    return d + 1;
}

int QuadTree::depth() const { return depth_of(*root_); }

}  // namespace mosaic
