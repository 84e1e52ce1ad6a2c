#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace mosaic {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned rectangle in source-frame pixel coordinates.
struct BBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    static BBox from_xywh(double x, double y, double w, double h) { return {x, y, x + w, y + h}; }

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() * height(); }
    Point2 center() const { return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)}; }
    bool valid() const { return x_min <= x_max && y_min <= y_max; }
    bool contains(Point2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
    bool contains(const BBox& o) const {
        return o.x_min >= x_min && o.y_min >= y_min && o.x_max <= x_max && o.y_max <= y_max;
    }

    bool operator==(const BBox&) const = default;
};

// Boundary contact counts as intersecting.
bool intersects(const BBox& a, const BBox& b);

// Overlap rectangle; degenerate (zero-area, possibly clamped) when the boxes are disjoint.
BBox intersection(const BBox& a, const BBox& b);
double intersection_area(const BBox& a, const BBox& b);
BBox enclose(const BBox& a, const BBox& b);
BBox clamp_to(const BBox& b, const BBox& bounds);

double iou(const BBox& a, const BBox& b);

struct ScoredBox {
    BBox box;
    double confidence = 0.0;
};

/// Greedy non-maximum suppression. Returns indices of survivors in order of
/// descending confidence; equal confidences keep insertion order.
std::vector<std::size_t> nms_indices(std::span<const ScoredBox> boxes, double iou_threshold);
std::vector<ScoredBox> nms(std::span<const ScoredBox> boxes, double iou_threshold);

/// 4-DOF similarity transform: p' = scale * R(rotation) * p + t.
struct Affine2D {
    double scale = 1.0;
    double rotation = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    static Affine2D identity() { return {}; }
    static Affine2D translation(double x, double y) { return {1.0, 0.0, x, y}; }

    Point2 apply(Point2 p) const;
    Affine2D inverse() const;
    // (a.then(b))(p) == b(a(p))
    Affine2D then(const Affine2D& next) const;
};

BBox apply_affine(const Affine2D& t, const BBox& b);

/// Region quadtree over (box, id) entries. Entries that straddle a split line
/// stay at the node that owns them.
class QuadTree {
public:
    struct Entry {
        BBox box;
        int id = 0;
    };

    static constexpr int kDefaultCapacity = 8;
    static constexpr int kDefaultMaxDepth = 8;

    QuadTree(const BBox& region, std::span<const Entry> entries, int capacity = kDefaultCapacity,
             int max_depth = kDefaultMaxDepth);

    /// Ids of all entries whose boxes intersect the probe, sorted ascending.
    std::vector<int> query(const BBox& probe) const;

    const BBox& region() const { return root_->region; }
    std::size_t size() const { return count_; }
    int depth() const;

private:
    struct Node {
        BBox region;
        std::vector<Entry> entries;
        std::unique_ptr<Node> children[4];
        bool leaf() const { return !children[0]; }
    };

    void insert(Node& node, const Entry& e, int depth);
    void split(Node& node, int depth);
    void collect(const Node& node, const BBox& probe, std::vector<int>& out) const;
    static int depth_of(const Node& node);

    std::unique_ptr<Node> root_;
    int capacity_;
    int max_depth_;
    std::size_t count_ = 0;
};

}  // namespace mosaic
