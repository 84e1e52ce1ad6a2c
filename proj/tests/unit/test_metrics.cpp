#include "mosaic/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace mosaic;

namespace {

Detection det(const BBox& b, double conf, std::string label = "person") {
    Detection d;
    d.bbox = b;
    d.confidence = conf;
    d.label = std::move(label);
    return d;
}

std::size_t table_levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j)
            d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1])});
    return d[a.size()][b.size()];
}

std::string random_text(std::mt19937_64& rng) {
    std::string s(rng() % 9, 'A');
    for (auto& c : s) c = static_cast<char>('A' + rng() % 4);
    return s;
}

}  // namespace

TEST(AveragePrecision, SingleMatch) {
    EvalImage img;
    img.truth = {{{0, 0, 10, 10}, "person"}};
    img.detections = {det({0, 0, 10, 12.5}, 0.9)};  // IoU 0.8
    const std::vector<EvalImage> imgs{img};
    EXPECT_DOUBLE_EQ(*average_precision(imgs, "person"), 1.0);
}

TEST(AveragePrecision, BelowThreshold) {
    EvalImage img;
    img.truth = {{{0, 0, 10, 10}, "person"}};
    img.detections = {det({0, 0, 10, 25}, 0.9)};  // IoU 0.4
    const std::vector<EvalImage> imgs{img};
    EXPECT_DOUBLE_EQ(*average_precision(imgs, "person"), 0.0);
}

TEST(AveragePrecision, HandIntegratedCurve) {
    EvalImage img;
    img.truth = {{{0, 0, 10, 10}, "person"}, {{50, 50, 60, 60}, "person"}};
    img.detections = {det({0, 0, 10, 10}, 0.9), det({100, 100, 110, 110}, 0.8), det({50, 50, 60, 60}, 0.7)};
    const std::vector<EvalImage> imgs{img};
    EXPECT_NEAR(*average_precision(imgs, "person"), 0.5 + (2.0 / 3.0) * 0.5, 1e-12);
}

TEST(AveragePrecision, AbsentClass) {
    const std::vector<EvalImage> imgs{EvalImage{}};
    EXPECT_FALSE(average_precision(imgs, "person"));
    EXPECT_FALSE(map50(imgs));
}

TEST(AveragePrecision, DetectionOrderIrrelevant) {
    std::mt19937_64 rng(25);
    std::uniform_real_distribution<double> pos(0, 100);
    for (int trial = 0; trial < 200; ++trial) {
        EvalImage img;
        for (int i = 0; i < 5; ++i) img.truth.push_back({BBox::from_xywh(pos(rng), pos(rng), 20, 20), "person"});
        for (int i = 0; i < 8; ++i) img.detections.push_back(det(BBox::from_xywh(pos(rng), pos(rng), 20, 20), (i + 1) / 10.0));
        const std::vector<EvalImage> a{img};
        std::shuffle(img.detections.begin(), img.detections.end(), rng);
        std::shuffle(img.truth.begin(), img.truth.end(), rng);
        const std::vector<EvalImage> b{img};
        ASSERT_NEAR(*average_precision(a, "person"), *average_precision(b, "person"), 1e-12);
    }
}

TEST(Map50, MeanOverClasses) {
    EvalImage img;
    img.truth = {{{0, 0, 10, 10}, "car"}, {{50, 50, 60, 60}, "bus"}};
    img.detections = {det({0, 0, 10, 10}, 0.9, "car")};
    const std::vector<EvalImage> imgs{img};
    EXPECT_DOUBLE_EQ(*map50(imgs), 0.5);
}

TEST(Cer, Examples) {
    EXPECT_DOUBLE_EQ(cer("ABC123", "ABC123"), 0.0);
    EXPECT_DOUBLE_EQ(cer("ABC123", "ABC12"), 1.0 / 5.0);
    EXPECT_DOUBLE_EQ(cer("", "ABC123"), 1.0);
    EXPECT_THROW(cer("A", ""), std::invalid_argument);
}

TEST(Levenshtein, MatchesTableDp) {
    std::mt19937_64 rng(26);
    for (int i = 0; i < 5000; ++i) {
        const std::string a = random_text(rng), b = random_text(rng);
        ASSERT_EQ(levenshtein(a, b), table_levenshtein(a, b)) << a << " / " << b;
    }
}

TEST(Levenshtein, TriangleInequalityAndCerBound) {
    std::mt19937_64 rng(27);
    for (int i = 0; i < 5000; ++i) {
        const std::string a = random_text(rng), b = random_text(rng), c = random_text(rng);
        ASSERT_LE(levenshtein(a, c), levenshtein(a, b) + levenshtein(b, c));
        if (!b.empty()) {
            ASSERT_LE(cer(a, b), double(std::max(a.size(), b.size())) / double(b.size()));
            ASSERT_EQ(cer(b, b), 0.0);
        }
    }
}

TEST(PackingStats, EmptyLayout) {
    CanvasLayout l;
    const auto s = packing_stats(l, {});
    EXPECT_DOUBLE_EQ(s.utilization, 0.0);
    EXPECT_EQ(s.tiles, 0);
    EXPECT_DOUBLE_EQ(s.wasted_px, 640.0 * 640.0);
}

TEST(PackingStats, ExactFill) {
    CanvasLayout l;
    l.canvas = 64;
    for (int i = 0; i < 4; ++i) {
        Placement p;
        p.tile_id = i;
        p.x = 32 * (i % 2);
        p.y = 32 * (i / 2);
        p.w = p.h = 32;
        l.placements.push_back(p);
    }
    const auto s = packing_stats(l, {});
    EXPECT_DOUBLE_EQ(s.utilization, 1.0);
    EXPECT_EQ(s.tiles, 4);
    EXPECT_DOUBLE_EQ(s.wasted_px, 0.0);
}
