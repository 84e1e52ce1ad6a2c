#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mosaic/geometry.hpp"

namespace mosaic {

/// One tile to be resized and placed on the canvas.
struct PackItem {
    int camera_id = 0;
    int tile_id = 0;
    BBox source;  // crop in the camera frame
    double width = 0.0;
    double height = 0.0;
    double min_scale = 1.0;
    double max_scale = 1.0;
    double elasticity = 1.0;
};

struct Placement {
    int item = 0;  // index into the packed item list
    int camera_id = 0;
    int tile_id = 0;
    BBox source;
    double scale = 1.0;
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    BBox dest() const { return {double(x), double(y), double(x + w), double(y + h)}; }
};

struct CanvasLayout {
    int canvas = 640;
    std::vector<Placement> placements;
    bool relaxed = false;
    int relaxations = 0;
    double relaxation_factor = 0.0;  // cumulative reduction applied to lower bounds
    double fitness = 0.0;
    int generations = 0;

    /// In-bounds and pairwise non-overlapping.
    bool valid() const;
    double utilization() const;
};

struct Size2i {
    int w = 0;
    int h = 0;
};

struct Position {
    int x = 0;
    int y = 0;
    bool operator==(const Position&) const = default;
};

/// Skyline bottom-left placement in descending height (then width, then index)
/// order. Entries are empty for rectangles that did not fit.
std::vector<std::optional<Position>> skyline_place(std::span<const Size2i> sizes, int canvas);

/// All-or-nothing wrapper around skyline_place.
std::optional<std::vector<Position>> place_rectangles(std::span<const Size2i> sizes, int canvas);

/// Nearest even integer, at least 2.
int even_round(double v);
Size2i placed_size(const PackItem& item, double scale);

struct DeParams {
    int population = 0;  // 0 selects max(20, 4 * items)
    double F = 0.7;
    double CR = 0.9;
    int generations = 150;
    std::uint64_t seed = 1;
    double penalty = 1e6;
    int stall_generations = 10;  // stop early once a feasible best has not improved this long
    int max_relaxations = 3;
    double relaxation_step = 0.1;
    int threads = 1;
};

struct PackEvaluation {
    double shortfall = 0.0;  // max elasticity-weighted distance below max_scale
    int unplaced = 0;
    double overflow = 0.0;  // excess scaled area as a fraction of the canvas
    double fitness = 0.0;
    bool feasible() const { return unplaced == 0 && overflow == 0.0; }
};

/// Fitness of one scale vector; `positions` receives the placement when non-null.
PackEvaluation evaluate_scales(std::span<const PackItem> items, std::span<const double> scales, int canvas,
                               double penalty, std::vector<std::optional<Position>>* positions = nullptr);

class AdmissionControlError : public std::runtime_error {
public:
    AdmissionControlError(int items, int relaxations, double factor)
        : std::runtime_error("admission control: " + std::to_string(items) + " tiles cannot be packed after " +
                             std::to_string(relaxations) +
                             " lower-bound relaxations; assign fewer camera streams to this node"),
          items_(items),
          relaxations_(relaxations),
          factor_(factor) {}
    int items() const { return items_; }
    int relaxations() const { return relaxations_; }
    double relaxation_factor() const { return factor_; }

private:
    int items_;
    int relaxations_;
    double factor_;
};

inline constexpr double kMinPlacedSide = 16.0;

/// Scales every lower bound by (1 - factor), never below a 16 px shorter side.
std::vector<PackItem> relax_bounds(std::span<const PackItem> items, double factor);

/// Differential-evolution search for per-tile scales that fit every tile on
/// a canvas x canvas frame while keeping each tile as close to its maximum
/// scale as possible. Relaxes lower bounds when nothing fits and throws
/// AdmissionControlError when relaxation is exhausted.
CanvasLayout inverse_bin_pack(std::span<const PackItem> items, int canvas, const DeParams& params = {});

}  // namespace mosaic
