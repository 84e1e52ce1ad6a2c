#include "mosaic/baselines.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mosaic;

namespace {

double cell_scale(int rows, int cols, int w, int h, int canvas) {
    return std::min(double(canvas) / cols / w, double(canvas) / rows / h);
}

}  // namespace

TEST(Fcfs, SquareFrameIsIdentity) {
    const auto l = fcfs_layout(640, 640, 640);
    ASSERT_EQ(l.placements.size(), 1u);
    const auto& p = l.placements[0];
    EXPECT_EQ(p.x, 0);
    EXPECT_EQ(p.y, 0);
    EXPECT_EQ(p.w, 640);
    EXPECT_EQ(p.h, 640);
    EXPECT_DOUBLE_EQ(p.scale, 1.0);
}

TEST(Fcfs, FourKLetterbox) {
    const auto& p = fcfs_layout(3840, 2160, 640).placements.at(0);
    EXPECT_NEAR(p.scale, 1.0 / 6.0, 1e-12);
    EXPECT_EQ(p.w, 640);
    EXPECT_EQ(p.h, 360);
    EXPECT_EQ(p.x, 0);
    EXPECT_EQ(p.y, 140);
}

TEST(Fcfs, FullHdLetterbox) {
    const auto& p = fcfs_layout(1920, 1080, 640).placements.at(0);
    EXPECT_NEAR(p.scale, 1.0 / 3.0, 1e-12);
    EXPECT_EQ(p.w, 640);
    EXPECT_EQ(p.h, 360);
}

TEST(Uniform, SingleCameraMatchesFcfs) {
    const auto a = uniform_layout(1, 1920, 1080, 640);
    const auto b = fcfs_layout(1920, 1080, 640);
    ASSERT_EQ(a.placements.size(), 1u);
    EXPECT_EQ(a.placements[0].dest(), b.placements[0].dest());
    EXPECT_EQ(a.placements[0].source, b.placements[0].source);
}

TEST(Uniform, FourSquareFramesGrid) {
    const auto c = choose_uniform(4, 500, 500, 640);
    EXPECT_EQ(c.arrangement, Arrangement::grid);
    EXPECT_EQ(c.rows, 2);
    EXPECT_EQ(c.cols, 2);
    EXPECT_NEAR(c.scale, 640.0 / 1000.0, 1e-12);
}

TEST(Uniform, TwoWideFramesStackVertically) {
    const auto c = choose_uniform(2, 1280, 720, 640);
    EXPECT_EQ(c.rows, 2);
    EXPECT_EQ(c.cols, 1);
    EXPECT_NEAR(c.scale, 320.0 / 720.0, 1e-12);
    EXPECT_GT(c.scale, cell_scale(1, 2, 1280, 720, 640));
}

TEST(Uniform, ChoiceDominatesEveryArrangement) {
    std::mt19937_64 rng(28);
    for (int trial = 0; trial < 500; ++trial) {
        const int m = 1 + int(rng() % 9);
        const int w = 100 + int(rng() % 3000), h = 100 + int(rng() % 3000);
        const auto c = choose_uniform(m, w, h, 640);
        for (int rows = 1; rows <= m; ++rows)
            ASSERT_GE(c.scale + 1e-12, cell_scale(rows, (m + rows - 1) / rows, w, h, 640));
        ASSERT_GE(c.scale + 1e-12, cell_scale(1, m, w, h, 640));
        ASSERT_GE(c.scale + 1e-12, cell_scale(m, 1, w, h, 640));
        ASSERT_GE(c.rows * c.cols, m);
    }
}

TEST(Uniform, LayoutCellsAreDisjoint) {
    for (int m = 1; m <= 9; ++m) {
        const auto l = uniform_layout(m, 1920, 1080, 640);
        ASSERT_EQ(int(l.placements.size()), m);
        EXPECT_TRUE(l.valid());
        for (int k = 0; k < m; ++k) EXPECT_EQ(l.placements[std::size_t(k)].camera_id, k);
    }
}
