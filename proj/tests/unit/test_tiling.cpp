#include "mosaic/tiling.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mosaic;

namespace {

std::vector<Tile> at_scale(const std::vector<Tile>& tiles, int dim) {
    std::vector<Tile> out;
    for (const Tile& t : tiles)
        if (t.scale_dim == dim) out.push_back(t);
    return out;
}

Tile tile(int side, double x = 0, double y = 0) { return {0, 0, side, BBox::from_xywh(x, y, side, side)}; }

}  // namespace

TEST(TileOffsets, ExactGrid) { EXPECT_EQ(tile_offsets(128, 64, 64), (std::vector<int>{0, 64})); }

TEST(TileOffsets, FlushShift) { EXPECT_EQ(tile_offsets(100, 64, 64), (std::vector<int>{0, 36})); }

TEST(GenerateTiles, ExactGrid) {
    const auto tiles = generate_tiles(128, 128, {{64}, 128}, 0.0);
    EXPECT_EQ(at_scale(tiles, 64).size(), 4u);
    EXPECT_EQ(at_scale(tiles, 128).size(), 1u);
}

TEST(GenerateTiles, HalfOverlap) {
    EXPECT_EQ(at_scale(generate_tiles(128, 128, {{64}, 128}, 0.5), 64).size(), 9u);
}

TEST(GenerateTiles, FlushShiftedBorder) {
    const auto tiles = at_scale(generate_tiles(100, 100, {{64}, 128}, 0.0), 64);
    ASSERT_EQ(tiles.size(), 4u);
    for (const Tile& t : tiles) {
        EXPECT_TRUE(t.bbox.x_min == 0 || t.bbox.x_min == 36);
        EXPECT_TRUE(t.bbox.y_min == 0 || t.bbox.y_min == 36);
    }
}

TEST(GenerateTiles, IdsIndexTheBag) {
    const auto tiles = generate_tiles(300, 200, {{64, 96}, 128}, 0.25, 3);
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        EXPECT_EQ(tiles[i].id, static_cast<int>(i));
        EXPECT_EQ(tiles[i].camera_id, 3);
    }
}

TEST(GenerateTiles, EveryScaleCoversTheFrame) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 130 + static_cast<int>(rng() % 400);
        const int h = 130 + static_cast<int>(rng() % 300);
        const double overlap = (rng() % 4) * 0.25;
        const ScaleSet s{{32, 64, 96}, 128};
        const auto tiles = generate_tiles(w, h, s, overlap);
        for (int dim : s.all()) {
            std::vector<char> hit(static_cast<std::size_t>(w) * h, 0);
            for (const Tile& t : at_scale(tiles, dim)) {
                ASSERT_GE(t.bbox.x_min, 0);
                ASSERT_GE(t.bbox.y_min, 0);
                ASSERT_LE(t.bbox.x_max, w);
                ASSERT_LE(t.bbox.y_max, h);
                for (int y = int(t.bbox.y_min); y < int(t.bbox.y_max); ++y)
                    for (int x = int(t.bbox.x_min); x < int(t.bbox.x_max); ++x) hit[std::size_t(y) * w + x] = 1;
            }
            ASSERT_EQ(std::count(hit.begin(), hit.end(), 0), 0) << w << "x" << h << " dim " << dim;
        }
    }
}

TEST(Admissible, RatioInsideBand) { EXPECT_TRUE(is_admissible(tile(64), BBox::from_xywh(10, 10, 20, 39))); }

TEST(Admissible, RatioBelowBand) { EXPECT_FALSE(is_admissible(tile(96), BBox::from_xywh(10, 10, 20, 39))); }

TEST(Admissible, HalfCroppedMask) { EXPECT_FALSE(is_admissible(tile(64), BBox::from_xywh(54, 10, 20, 39))); }

TEST(Admissible, ClosedFormRatioBand) {
    for (int s : {32, 64, 96, 128}) {
        for (double h = 1; h <= 140; h += 0.5) {
            const BBox mask = BBox::from_xywh(0, 0, std::min<double>(h, s), h);
            const bool expected = h <= s && h / 0.9 < s && s < h / 0.5;
            EXPECT_EQ(is_admissible(tile(s), mask), expected) << "s " << s << " h " << h;
        }
    }
}

TEST(Assign, ViewsAreConsistent) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> pos(0, 400), side(10, 90);
    const auto tiles = generate_tiles(480, 480, {{32, 64, 96}, 128});
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<BBox> masks(rng() % 8);
        for (auto& m : masks) m = BBox::from_xywh(pos(rng), pos(rng), side(rng), side(rng));
        const Assignment a = assign_masks(tiles, masks);
        ASSERT_TRUE(a.consistent());
        ASSERT_EQ(a.mask_to_tiles.size(), masks.size());
        for (std::size_t m = 0; m < masks.size(); ++m) {
            const bool none = a.mask_to_tiles[m].empty();
            const bool listed = std::count(a.unassigned.begin(), a.unassigned.end(), int(m)) > 0;
            ASSERT_EQ(none, listed);
            for (int t : a.mask_to_tiles[m]) ASSERT_TRUE(is_admissible(tiles[std::size_t(t)], masks[m]));
        }
        // Exhaustive check that the quadtree search misses nothing.
        for (std::size_t m = 0; m < masks.size(); ++m) {
            std::size_t count = 0;
            for (const Tile& t : tiles) count += is_admissible(t, masks[m]);
            ASSERT_EQ(count, a.mask_to_tiles[m].size());
        }
    }
}
