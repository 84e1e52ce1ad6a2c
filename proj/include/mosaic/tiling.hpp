#pragma once

#include <map>
#include <span>
#include <vector>

#include "mosaic/geometry.hpp"
#include "mosaic/scale_profiler.hpp"

namespace mosaic {

/// Square crop candidate at one scale. `id` indexes the camera's tile bag.
struct Tile {
    int id = 0;
    int camera_id = 0;
    int scale_dim = 0;
    BBox bbox;
};

/// Grid offsets along one axis: stride steps from 0, with the final tile shifted flush to the edge.
std::vector<int> tile_offsets(int extent, int side, int stride);

/// Bag of tiles at every scale (catch-all included). Strides are
/// round(side * (1 - overlap)); tiles never leave the frame.
std::vector<Tile> generate_tiles(int frame_width, int frame_height, const ScaleSet& scales, double overlap = 0.25,
                                 int camera_id = 0);

struct GoodnessCriteria {
    double coverage_min = 0.95;
    double ratio_low = 0.5;   // exclusive
    double ratio_high = 0.9;  // exclusive
};

/// Both views of the admissible mask/tile relation.
struct Assignment {
    std::vector<std::vector<int>> mask_to_tiles;  // indexed by mask position
    std::map<int, std::vector<int>> tile_to_masks;  // tile id -> mask positions
    std::vector<int> unassigned;                    // masks with no admissible tile

    bool consistent() const;
};

bool is_admissible(const Tile& tile, const BBox& mask, const GoodnessCriteria& g = {});

/// Tests every (mask, tile) pair returned by a quadtree intersection search.
Assignment assign_masks(std::span<const Tile> tiles, std::span<const BBox> masks, const GoodnessCriteria& g = {});

}  // namespace mosaic
