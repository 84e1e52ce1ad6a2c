#include "mosaic/setcover.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace mosaic {

double union_area(const BBox& region, std::span<const BBox> masks) {
    std::vector<BBox> clipped;
    std::vector<double> xs{region.x_min, region.x_max};
    std::vector<double> ys{region.y_min, region.y_max};
    for (const BBox& m : masks) {
        const BBox c = intersection(region, m);
        if (c.width() <= 0.0 || c.height() <= 0.0) continue;
        clipped.push_back(c);
        xs.push_back(c.x_min);
        xs.push_back(c.x_max);
        ys.push_back(c.y_min);
        ys.push_back(c.y_max);
    }
    if (clipped.empty()) return 0.0;
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double cx = 0.5 * (xs[i] + xs[i + 1]);
        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
            const double cy = 0.5 * (ys[j] + ys[j + 1]);
            for (const BBox& c : clipped) {
                if (cx > c.x_min && cx < c.x_max && cy > c.y_min && cy < c.y_max) {
                    area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
                    break;
                }
            }
        }
    }
    return area;
}

double tile_cost(const Tile& tile, std::span<const BBox> masks_in_tile) {
    return std::max(0.0, tile.bbox.area() - union_area(tile.bbox, masks_in_tile));
}

std::vector<TileChoice> greedy_mcmsc(std::span<const int> universe, std::span<const TileChoice> candidates,
                                     bool prune) {
    const std::set<int> wanted(universe.begin(), universe.end());
    std::set<int> covered;
    std::vector<bool> taken(candidates.size(), false);
    std::vector<TileChoice> chosen;

    while (covered.size() < wanted.size()) {
        std::size_t best = candidates.size();
        double best_ratio = std::numeric_limits<double>::infinity();
        std::size_t best_new = 0;
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (taken[i]) continue;
            std::size_t fresh = 0;
            for (int m : candidates[i].covered_masks) {
                if (wanted.count(m) && !covered.count(m)) ++fresh;
            }
            if (fresh == 0) continue;
            const double ratio = candidates[i].cost / static_cast<double>(fresh);
            bool better = false;
            if (best == candidates.size() || ratio < best_ratio) {
                better = true;
            } else if (ratio == best_ratio) {
                const TileChoice& cur = candidates[best];
                if (fresh != best_new) {
                    better = fresh > best_new;
                } else if (candidates[i].cost != cur.cost) {
                    better = candidates[i].cost < cur.cost;
                } else {
                    better = candidates[i].tile.id < cur.tile.id;
                }
            }
            if (better) {
                best = i;
                best_ratio = ratio;
                best_new = fresh;
            }
        }
        if (best == candidates.size()) {
            for (int m : wanted) {
                if (!covered.count(m)) throw UncoverableMaskError(m);
            }
        }
        taken[best] = true;
        for (int m : candidates[best].covered_masks) {
            if (wanted.count(m)) covered.insert(m);
        }
        chosen.push_back(candidates[best]);
    }
    return prune ? prune_redundant(std::move(chosen)) : chosen;
}

std::vector<TileChoice> prune_redundant(std::vector<TileChoice> chosen) {
    std::map<int, int> multiplicity;
    for (const TileChoice& c : chosen) {
        for (int m : c.covered_masks) ++multiplicity[m];
    }
    std::vector<std::size_t> order(chosen.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return chosen[a].cost > chosen[b].cost; });

    std::vector<bool> keep(chosen.size(), true);
    for (std::size_t i : order) {
        const bool redundant = std::all_of(chosen[i].covered_masks.begin(), chosen[i].covered_masks.end(),
                                           [&](int m) { return multiplicity[m] > 1; });
        if (!redundant) continue;
        keep[i] = false;
        for (int m : chosen[i].covered_masks) --multiplicity[m];
    }
    std::vector<TileChoice> out;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
        if (keep[i]) out.push_back(std::move(chosen[i]));
    }
    return out;
}

AppProfile parse_profile(std::string_view name) {
    if (name == "detection") return AppProfile::detection;
    if (name == "ocr") return AppProfile::ocr;
    throw std::invalid_argument("unknown application profile: " + std::string(name));
}

const char* to_string(AppProfile p) { return p == AppProfile::ocr ? "ocr" : "detection"; }

TileChoice attach_bounds(TileChoice choice, int scale_rank, int rank_count, AppProfile profile) {
    switch (profile) {
        case AppProfile::detection: {
            // A lone scale is the catch-all, i.e. the largest rank.
            const double frac = rank_count <= 1 ? 1.0
                                                : std::clamp(static_cast<double>(scale_rank) / (rank_count - 1), 0.0, 1.0);
            choice.min_scale = 0.5 + 0.3 * (1.0 - frac);
            choice.max_scale = 1.5 - 0.25 * frac;
            choice.elasticity = 0.5 + 0.5 * frac;
            return choice;
        }
        case AppProfile::ocr:
            choice.min_scale = 1.0;
            choice.max_scale = 1.25;
            choice.elasticity = 0.25;
            return choice;
    }
    throw std::invalid_argument("attach_bounds: unknown profile");
}

CameraSelection select_tiles(std::span<const Tile> tiles, std::span<const BBox> masks, const Assignment& assignment,
                             const std::vector<int>& scale_dims, AppProfile profile) {
    CameraSelection out;
    if (masks.empty()) return out;

    std::map<int, std::vector<int>> members = assignment.tile_to_masks;
    std::set<int> degraded_tiles;
    const int catch_all = scale_dims.empty() ? 0 : scale_dims.back();
    for (int m : assignment.unassigned) {
        int best = -1;
        double best_cover = -1.0;
        for (const Tile& t : tiles) {
            if (t.scale_dim != catch_all) continue;
            const double cover = intersection_area(t.bbox, masks[static_cast<std::size_t>(m)]);
            if (cover > best_cover) {
                best_cover = cover;
                best = t.id;
            }
        }
        if (best < 0) throw UncoverableMaskError(m);
        members[best].push_back(m);
        degraded_tiles.insert(best);
        ++out.degraded_masks;
    }

    std::vector<TileChoice> candidates;
    for (auto& [tile_id, mask_ids] : members) {
        std::sort(mask_ids.begin(), mask_ids.end());
        mask_ids.erase(std::unique(mask_ids.begin(), mask_ids.end()), mask_ids.end());
        TileChoice c;
        c.tile = tiles[static_cast<std::size_t>(tile_id)];
        c.covered_masks = mask_ids;
        std::vector<BBox> boxes;
        for (int m : mask_ids) boxes.push_back(masks[static_cast<std::size_t>(m)]);
        c.cost = tile_cost(c.tile, boxes);
        c.degraded = degraded_tiles.count(tile_id) > 0;
        candidates.push_back(std::move(c));
    }

    std::vector<int> universe(masks.size());
    for (std::size_t i = 0; i < universe.size(); ++i) universe[i] = static_cast<int>(i);
    out.chosen = greedy_mcmsc(universe, candidates);

    const int ranks = static_cast<int>(scale_dims.size());
    for (TileChoice& c : out.chosen) {
        const auto it = std::find(scale_dims.begin(), scale_dims.end(), c.tile.scale_dim);
        const int rank = it == scale_dims.end() ? ranks - 1 : static_cast<int>(it - scale_dims.begin());
        c = attach_bounds(std::move(c), rank, ranks, profile);
    }
    return out;
}

}  // namespace mosaic
