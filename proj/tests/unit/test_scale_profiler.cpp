#include "mosaic/scale_profiler.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

using namespace mosaic;

namespace {

// Exhaustive WCSS minimum over every labelling of `pts` into k non-empty groups.
double brute_force_wcss(const std::vector<SizeSample>& pts, int k) {
    const int n = static_cast<int>(pts.size());
    std::vector<int> label(static_cast<std::size_t>(n), 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> sx(k, 0), sy(k, 0), cnt(k, 0);
        for (int i = 0; i < n; ++i) {
            sx[label[i]] += pts[i].width;
            sy[label[i]] += pts[i].height;
            cnt[label[i]] += 1;
        }
        if (std::all_of(cnt.begin(), cnt.end(), [](double c) { return c > 0; })) {
            double w = 0;
            for (int i = 0; i < n; ++i) {
                const double dx = pts[i].width - sx[label[i]] / cnt[label[i]];
                const double dy = pts[i].height - sy[label[i]] / cnt[label[i]];
                w += dx * dx + dy * dy;
            }
            best = std::min(best, w);
        }
        int pos = 0;
        while (pos < n && ++label[pos] == k) label[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

}  // namespace

TEST(MergeProximal, FarBoxesStaySeparate) {
    const std::vector<BBox> boxes{{0, 0, 10, 10}, {100, 100, 120, 130}};
    EXPECT_EQ(merge_proximal_boxes(boxes, 8).size(), 2u);
}

TEST(MergeProximal, OverlapAddsEnclosingSample) {
    const std::vector<BBox> boxes{{0, 0, 10, 10}, {5, 5, 15, 15}};
    const auto out = merge_proximal_boxes(boxes, 0);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_NE(std::find(out.begin(), out.end(), SizeSample{15, 15}), out.end());
}

TEST(MergeProximal, GapBridgesNearbyBoxes) {
    const std::vector<BBox> boxes{{0, 0, 10, 10}, {15, 0, 25, 10}};
    EXPECT_EQ(merge_proximal_boxes(boxes, 4).size(), 2u);
    EXPECT_EQ(merge_proximal_boxes(boxes, 8).size(), 3u);
}

TEST(MergeProximal, Empty) { EXPECT_TRUE(merge_proximal_boxes({}, 8).empty()); }

TEST(ClusterSizes, IdenticalSamplesGiveOneCluster) {
    const std::vector<SizeSample> s(20, SizeSample{40, 30});
    const auto c = cluster_sizes(s, 6);
    EXPECT_EQ(c.k, 1);
    ASSERT_EQ(c.centroids.size(), 1u);
    EXPECT_EQ(c.centroids[0], (SizeSample{40, 30}));
}

TEST(ClusterSizes, TwoTightClusters) {
    std::vector<SizeSample> s;
    for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy) {
            s.push_back({30.0 + dx, 30.0 + dy});
            s.push_back({100.0 + dx, 100.0 + dy});
        }
    const auto c = cluster_sizes(s, 6);
    ASSERT_EQ(c.k, 2);
    EXPECT_NEAR(c.centroids[0].width, 30, 1e-9);
    EXPECT_NEAR(c.centroids[0].height, 30, 1e-9);
    EXPECT_NEAR(c.centroids[1].width, 100, 1e-9);
    EXPECT_NEAR(c.centroids[1].height, 100, 1e-9);
}

TEST(ClusterSizes, PedestrianGroupsGiveTwoTileScales) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 1.5);
    const SizeSample centres[] = {{36, 39}, {50, 54}, {81, 44}};
    std::vector<SizeSample> s;
    for (const auto& c : centres)
        for (int i = 0; i < 40; ++i) s.push_back({c.width + noise(rng), c.height + noise(rng)});
    const auto c = cluster_sizes(s, 6);

    // Chord rule evaluated directly on the reported curve.
    const auto& w = c.wcss;
    const double n = double(w.size() - 1);
    int best = 0;
    double best_gap = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double gap = 1.0 - i / n - (w[i] - w.back()) / (w.front() - w.back());
        if (gap > best_gap) {
            best_gap = gap;
            best = int(i);
        }
    }
    EXPECT_EQ(c.k, best + 1);
    EXPECT_EQ(derive_scales(c.centroids), (ScaleSet{{64, 96}, 128}));
}

TEST(KMeans, MatchesExhaustiveOptimumOnSmallSets) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> side(10, 120);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<SizeSample> pts;
        for (int i = 0; i < 7; ++i) pts.push_back({side(rng), side(rng)});
        for (int k = 1; k <= 3; ++k) {
            const auto fit = kmeans(pts, k);
            EXPECT_NEAR(fit.wcss, brute_force_wcss(pts, k), 1e-6 * (1 + fit.wcss)) << "trial " << trial << " k " << k;
        }
    }
}

TEST(ClusterSizes, DeterministicUnderSeed) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> side(10, 120);
    std::vector<SizeSample> pts;
    for (int i = 0; i < 60; ++i) pts.push_back({side(rng), side(rng)});
    const auto a = cluster_sizes(pts, 6);
    const auto b = cluster_sizes(pts, 6);
    EXPECT_EQ(a.k, b.k);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.wcss, b.wcss);
}

TEST(KneeIndex, ElbowCurve) {
    const std::vector<double> curve{1000, 200, 150, 120, 100};
    EXPECT_EQ(knee_index(curve), 1);
}

TEST(DeriveScales, WorkedExample) {
    const std::vector<SizeSample> c{{36, 39}, {50, 54}, {81, 44}};
    const ScaleSet s = derive_scales(c);
    EXPECT_EQ(s.dims, (std::vector<int>{64, 96}));
    EXPECT_EQ(s.catch_all, 128);
}

TEST(DeriveScales, CatchAllBump) {
    const std::vector<SizeSample> c{{32, 32}};
    const ScaleSet s = derive_scales(c);
    EXPECT_EQ(s.dims, (std::vector<int>{32}));
    EXPECT_EQ(s.catch_all, 64);
}

TEST(DeriveScales, MinimumScale) {
    const std::vector<SizeSample> c{{1, 1}};
    const ScaleSet s = derive_scales(c);
    EXPECT_EQ(s.dims, (std::vector<int>{32}));
    EXPECT_EQ(s.catch_all, 64);
}

TEST(DeriveScales, FuzzedInvariants) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> side(1, 400);
    for (int trial = 0; trial < 10000; ++trial) {
        std::vector<SizeSample> c(1 + rng() % 6);
        for (auto& p : c) p = {side(rng), side(rng)};
        const ScaleSet s = derive_scales(c);
        ASSERT_TRUE(s.valid());
        for (const auto& p : c) {
            const double need = std::max(p.width, p.height);
            ASSERT_TRUE(std::any_of(s.dims.begin(), s.dims.end(), [&](int d) { return d >= need; }));
        }
        for (int d : s.dims) ASSERT_EQ(d % kScaleQuantum, 0);
        ASSERT_GT(s.catch_all, s.dims.back());
    }
}
