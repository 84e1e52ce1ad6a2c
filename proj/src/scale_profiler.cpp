#include "mosaic/scale_profiler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mosaic {

std::vector<int> ScaleSet::all() const {
    std::vector<int> out = dims;
    out.push_back(catch_all);
    return out;
}

bool ScaleSet::valid() const {
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (dims[i] <= 0 || dims[i] % kScaleQuantum != 0) return false;
        if (i > 0 && dims[i] <= dims[i - 1]) return false;
    }
    if (catch_all <= 0) return false;
    return dims.empty() || catch_all > dims.back();
}

namespace {

struct DisjointSet {
    std::vector<std::size_t> parent;
    explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

double axis_gap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::max(a0, b0) - std::min(a1, b1)); }

double sq_dist(const SizeSample& a, const SizeSample& b) {
    const double dw = a.width - b.width;
    const double dh = a.height - b.height;
    return dw * dw + dh * dh;
}

}  // namespace

std::vector<SizeSample> merge_proximal_boxes(std::span<const BBox> boxes, double gap) {
    std::vector<SizeSample> out;
    out.reserve(boxes.size());
    for (const BBox& b : boxes) {
        if (b.width() > 0.0 && b.height() > 0.0) out.push_back({b.width(), b.height()});
    }

    DisjointSet groups(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            const double gx = axis_gap(boxes[i].x_min, boxes[i].x_max, boxes[j].x_min, boxes[j].x_max);
            const double gy = axis_gap(boxes[i].y_min, boxes[i].y_max, boxes[j].y_min, boxes[j].y_max);
            if (gx <= gap && gy <= gap) groups.unite(i, j);
        }
    }

    std::vector<std::size_t> members(boxes.size(), 0);
    std::vector<BBox> extent(boxes.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const std::size_t root = groups.find(i);
        extent[root] = members[root] == 0 ? boxes[i] : enclose(extent[root], boxes[i]);
        ++members[root];
    }
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (members[i] >= 2 && extent[i].width() > 0.0 && extent[i].height() > 0.0) {
            out.push_back({extent[i].width(), extent[i].height()});
        }
    }
    return out;
}

KMeansFit kmeans(std::span<const SizeSample> samples, int k, const KMeansOptions& opts) {
    if (samples.empty()) throw std::invalid_argument("kmeans: no samples");
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    const std::size_t n = samples.size();
    const auto kk = static_cast<std::size_t>(k);

    std::mt19937_64 rng(opts.seed + static_cast<std::uint64_t>(k) * 0x9e3779b97f4a7c15ULL);
    KMeansFit best;
    best.wcss = std::numeric_limits<double>::infinity();

    for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
        // k-means++ seeding
        std::vector<SizeSample> centers;
        centers.reserve(kk);
        centers.push_back(samples[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)]);
        std::vector<double> d2(n);
        while (centers.size() < kk) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double m = std::numeric_limits<double>::infinity();
                for (const auto& c : centers) m = std::min(m, sq_dist(samples[i], c));
                d2[i] = m;
                total += m;
            }
            std::size_t pick = 0;
            if (total > 0.0) {
                double r = std::uniform_real_distribution<double>(0.0, total)(rng);
                for (pick = 0; pick + 1 < n; ++pick) {
                    r -= d2[pick];
                    if (r <= 0.0) break;
                }
            } else {
                pick = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
            }
            centers.push_back(samples[pick]);
        }

        std::vector<int> labels(n, -1);
        for (int iter = 0; iter < opts.max_iterations; ++iter) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                int arg = 0;
                double m = sq_dist(samples[i], centers[0]);
                for (std::size_t c = 1; c < kk; ++c) {
                    const double d = sq_dist(samples[i], centers[c]);
                    if (d < m) {
                        m = d;
                        arg = static_cast<int>(c);
                    }
                }
                if (labels[i] != arg) {
                    labels[i] = arg;
                    changed = true;
                }
            }
            std::vector<SizeSample> sums(kk);
            std::vector<std::size_t> counts(kk, 0);
            for (std::size_t i = 0; i < n; ++i) {
                sums[labels[i]].width += samples[i].width;
                sums[labels[i]].height += samples[i].height;
                ++counts[labels[i]];
            }
            for (std::size_t c = 0; c < kk; ++c) {
                if (counts[c] > 0) {
                    centers[c] = {sums[c].width / counts[c], sums[c].height / counts[c]};
                    continue;
                }
                // Empty cluster: steal the point farthest from its centre.
                std::size_t far = 0;
                double fd = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(samples[i], centers[labels[i]]);
                    if (d > fd) {
                        fd = d;
                        far = i;
                    }
                }
                centers[c] = samples[far];
                labels[far] = static_cast<int>(c);
                changed = true;
            }
            if (!changed) break;
        }

        double wcss = 0.0;
        for (std::size_t i = 0; i < n; ++i) wcss += sq_dist(samples[i], centers[labels[i]]);
        if (wcss < best.wcss) {
            best.wcss = wcss;
            best.centroids = centers;
            best.labels = labels;
        }
    }
    return best;
}

int knee_index(std::span<const double> curve) {
    const int n = static_cast<int>(curve.size());
    if (n <= 1) return 0;
    const double first = curve.front();
    const double last = curve.back();
    if (!(first > last)) return 0;
    if (n == 2) {
        // No interior point to test against the chord; accept the split only if it halves the WCSS.
        return curve[1] <= 0.5 * curve[0] ? 1 : 0;
    }
    int best = 0;
    double best_dist = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / (n - 1);
        const double y = (curve[i] - last) / (first - last);
        // Chord runs from (0, 1) to (1, 0); positive distance means below the chord.
        const double dist = (1.0 - x - y) / std::sqrt(2.0);
        if (dist > best_dist + 1e-12) {
            best_dist = dist;
            best = i;
        }
    }
    return best;
}

SizeClusters cluster_sizes(std::span<const SizeSample> samples, int k_max, const KMeansOptions& opts) {
    if (samples.empty()) throw std::invalid_argument("cluster_sizes: empty sample set");
    if (k_max < 1) throw std::invalid_argument("cluster_sizes: k_max must be >= 1");

    std::vector<SizeSample> distinct(samples.begin(), samples.end());
    std::sort(distinct.begin(), distinct.end(), [](const SizeSample& a, const SizeSample& b) {
        return a.width != b.width ? a.width < b.width : a.height < b.height;
    });
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    const int k_top = std::min<int>(k_max, static_cast<int>(distinct.size()));

    SizeClusters out;
    std::vector<KMeansFit> fits;
    for (int k = 1; k <= k_top; ++k) {
        fits.push_back(kmeans(samples, k, opts));
        out.wcss.push_back(fits.back().wcss);
    }
    const int idx = knee_index(out.wcss);
    out.k = idx + 1;
    out.centroids = fits[static_cast<std::size_t>(idx)].centroids;
    std::sort(out.centroids.begin(), out.centroids.end(), [](const SizeSample& a, const SizeSample& b) {
        return a.width != b.width ? a.width < b.width : a.height < b.height;
    });
    return out;
}

int catch_all_for(int largest_dim) {
    const double target = 1.5 * largest_dim;
    int c = static_cast<int>(std::floor(target / kScaleQuantum)) * kScaleQuantum;
    if (c <= largest_dim) c = (static_cast<int>(std::floor(target / kScaleQuantum)) + 1) * kScaleQuantum;
    return c;
}

ScaleSet derive_scales(std::span<const SizeSample> centroids) {
    ScaleSet out;
    if (centroids.empty()) {
        out.catch_all = kFallbackCatchAll;
        return out;
    }
    for (const SizeSample& c : centroids) {
        const double side = std::max(c.width, c.height);
        const int dim = std::max(1, static_cast<int>(std::ceil(side / kScaleQuantum - 1e-9))) * kScaleQuantum;
        out.dims.push_back(dim);
    }
    std::sort(out.dims.begin(), out.dims.end());
    out.dims.erase(std::unique(out.dims.begin(), out.dims.end()), out.dims.end());
    out.catch_all = catch_all_for(out.dims.back());
    return out;
}

}  // namespace mosaic
