#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mosaic/geometry.hpp"

namespace mosaic {

struct SizeSample {
    double width = 0.0;
    double height = 0.0;

    bool operator==(const SizeSample&) const = default;
};

/// Square tile side lengths for one camera. `dims` is strictly increasing and
/// every entry is a positive multiple of 32; `catch_all` exceeds all of them.
struct ScaleSet {
    std::vector<int> dims;
    int catch_all = 128;

    /// dims followed by catch_all.
    std::vector<int> all() const;
    bool valid() const;

    bool operator==(const ScaleSet&) const = default;
};

inline constexpr int kScaleQuantum = 32;
inline constexpr int kFallbackCatchAll = 128;

/// Sizes of all boxes, plus the enclosing rectangle of every group (size >= 2)
/// of boxes connected through overlap or a boundary gap of at most `gap`.
std::vector<SizeSample> merge_proximal_boxes(std::span<const BBox> boxes, double gap = 8.0);

struct KMeansOptions {
    int restarts = 10;
    int max_iterations = 100;
    std::uint64_t seed = 0x5eed;
};

struct SizeClusters {
    int k = 0;
    std::vector<SizeSample> centroids;  // sorted by (width, height)
    std::vector<double> wcss;           // wcss[i] is the best WCSS found for k = i + 1
};

/// Lloyd's k-means with k-means++ seeding; best of `restarts` runs.
struct KMeansFit {
    std::vector<SizeSample> centroids;
    std::vector<int> labels;
    double wcss = 0.0;
};
KMeansFit kmeans(std::span<const SizeSample> samples, int k, const KMeansOptions& opts = {});

/// Picks k in 1..min(k_max, distinct points) at the knee of the WCSS curve:
/// the point farthest below the chord joining the curve's end points after
/// normalizing both axes to [0, 1].
SizeClusters cluster_sizes(std::span<const SizeSample> samples, int k_max = 6, const KMeansOptions& opts = {});

/// Index of the knee of a non-increasing curve (values for k = 1..n).
int knee_index(std::span<const double> curve);

/// Rounds each centroid's longer side up to a multiple of 32 and adds a
/// catch-all tile about 1.5x the largest scale.
ScaleSet derive_scales(std::span<const SizeSample> centroids);

int catch_all_for(int largest_dim);

}  // namespace mosaic
