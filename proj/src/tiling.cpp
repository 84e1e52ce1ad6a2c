#include "mosaic/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mosaic {

std::vector<int> tile_offsets(int extent, int side, int stride) {
    if (side >= extent) return {0};
    stride = std::max(1, stride);
    std::vector<int> offsets{0};
    while (offsets.back() + side < extent) {
        int next = offsets.back() + stride;
        if (next + side > extent) next = extent - side;
        offsets.push_back(next);
    }
    return offsets;
}

std::vector<Tile> generate_tiles(int frame_width, int frame_height, const ScaleSet& scales, double overlap,
                                 int camera_id) {
    std::vector<Tile> tiles;
    overlap = std::clamp(overlap, 0.0, 0.99);
    for (int dim : scales.all()) {
        const int stride = std::max(1, static_cast<int>(std::lround(dim * (1.0 - overlap))));
        const int side_x = std::min(dim, frame_width);
        const int side_y = std::min(dim, frame_height);
        for (int y : tile_offsets(frame_height, side_y, stride)) {
            for (int x : tile_offsets(frame_width, side_x, stride)) {
                Tile t;
                t.id = static_cast<int>(tiles.size());
                t.camera_id = camera_id;
                t.scale_dim = dim;
                t.bbox = {double(x), double(y), double(x + side_x), double(y + side_y)};
                tiles.push_back(t);
            }
        }
    }
    return tiles;
}

bool Assignment::consistent() const {
    std::set<std::pair<int, int>> forward;
    for (std::size_t m = 0; m < mask_to_tiles.size(); ++m) {
        for (int t : mask_to_tiles[m]) forward.emplace(static_cast<int>(m), t);
    }
    std::set<std::pair<int, int>> backward;
    for (const auto& [t, masks] : tile_to_masks) {
        for (int m : masks) backward.emplace(m, t);
    }
    return forward == backward;
}

bool is_admissible(const Tile& tile, const BBox& mask, const GoodnessCriteria& g) {
    const BBox inter = intersection(tile.bbox, mask);
    if (inter.width() < g.coverage_min * mask.width()) return false;
    if (inter.height() < g.coverage_min * mask.height()) return false;
    const double ratio = mask.height() / static_cast<double>(tile.scale_dim);
    return ratio > g.ratio_low && ratio < g.ratio_high;
}

Assignment assign_masks(std::span<const Tile> tiles, std::span<const BBox> masks, const GoodnessCriteria& g) {
    Assignment out;
    out.mask_to_tiles.resize(masks.size());
    if (tiles.empty()) {
        for (std::size_t m = 0; m < masks.size(); ++m) out.unassigned.push_back(static_cast<int>(m));
        return out;
    }

    std::vector<QuadTree::Entry> entries;
    entries.reserve(tiles.size());
    BBox region = tiles.front().bbox;
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        entries.push_back({tiles[i].bbox, static_cast<int>(i)});
        region = enclose(region, tiles[i].bbox);
    }
    const QuadTree tree(region, entries);

    for (std::size_t m = 0; m < masks.size(); ++m) {
        for (int ti : tree.query(masks[m])) {
            const Tile& tile = tiles[static_cast<std::size_t>(ti)];
            if (!is_admissible(tile, masks[m], g)) continue;
            out.mask_to_tiles[m].push_back(tile.id);
            out.tile_to_masks[tile.id].push_back(static_cast<int>(m));
        }
        if (out.mask_to_tiles[m].empty()) out.unassigned.push_back(static_cast<int>(m));
    }
    return out;
}

}  // namespace mosaic
