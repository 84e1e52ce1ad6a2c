#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mosaic/geometry.hpp"
#include "mosaic/tiling.hpp"

namespace mosaic {

/// A tile selected (or eligible) for the canvas.
struct TileChoice {
    Tile tile;
    std::vector<int> covered_masks;  // sorted mask ids
    double cost = 0.0;               // wasted pixels
    double min_scale = 1.0;
    double max_scale = 1.0;
    double elasticity = 1.0;
    bool degraded = false;  // holds a mask that failed the goodness criteria
};

class UncoverableMaskError : public std::runtime_error {
public:
    explicit UncoverableMaskError(int mask)
        : std::runtime_error("set cover: mask " + std::to_string(mask) + " is not covered by any candidate"),
          mask_(mask) {}
    int mask() const { return mask_; }

private:
    int mask_;
};

/// Exact area of the union of the mask rectangles clipped to `region`.
double union_area(const BBox& region, std::span<const BBox> masks);

/// Tile area not covered by any of its masks.
double tile_cost(const Tile& tile, std::span<const BBox> masks_in_tile);

/// Greedy min-cost set cover: repeatedly takes the candidate with the lowest
/// cost per newly covered mask. With `prune`, chosen tiles whose masks are all
/// covered by other chosen tiles are dropped afterwards.
std::vector<TileChoice> greedy_mcmsc(std::span<const int> universe, std::span<const TileChoice> candidates,
                                     bool prune = true);

/// Drops redundant tiles, most expensive first, until every remaining tile covers a mask no other tile does.
std::vector<TileChoice> prune_redundant(std::vector<TileChoice> chosen);

enum class AppProfile { detection, ocr };

AppProfile parse_profile(std::string_view name);
const char* to_string(AppProfile p);

/// Sets sizing bounds and elasticity from the scale rank (0 = smallest) among `rank_count` ranks.
TileChoice attach_bounds(TileChoice choice, int scale_rank, int rank_count, AppProfile profile);

struct CameraSelection {
    std::vector<TileChoice> chosen;
    int degraded_masks = 0;
};

/// Candidates from the assignment plus a catch-all fallback for masks no tile admits, then set cover and bounds.
CameraSelection select_tiles(std::span<const Tile> tiles, std::span<const BBox> masks, const Assignment& assignment,
                             const std::vector<int>& scale_dims, AppProfile profile);

}  // namespace mosaic
