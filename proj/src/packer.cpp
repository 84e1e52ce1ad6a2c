#include "mosaic/packer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <random>

#include "mosaic/parallel.hpp"

namespace mosaic {

int threads_from_env() {
    if (const char* v = std::getenv("MOSAIC_THREADS")) {
        const int n = std::atoi(v);
        if (n > 0) return n;
    }
    return 1;
}

bool CanvasLayout::valid() const {
    for (std::size_t i = 0; i < placements.size(); ++i) {
        const Placement& a = placements[i];
        if (a.w <= 0 || a.h <= 0) return false;
        if (a.x < 0 || a.y < 0 || a.x + a.w > canvas || a.y + a.h > canvas) return false;
        for (std::size_t j = i + 1; j < placements.size(); ++j) {
            if (intersection_area(a.dest(), placements[j].dest()) > 0.0) return false;
        }
    }
    return true;
}

double CanvasLayout::utilization() const {
    if (canvas <= 0) return 0.0;
    double area = 0.0;
    for (const Placement& p : placements) area += static_cast<double>(p.w) * p.h;
    return area / (static_cast<double>(canvas) * canvas);
}

namespace {

struct Segment {
    int x;
    int w;
    int y;  // filled depth from the top edge
};

std::vector<std::size_t> placement_order(std::span<const Size2i> sizes) {
    std::vector<std::size_t> order(sizes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sizes[a].h != sizes[b].h) return sizes[a].h > sizes[b].h;
        if (sizes[a].w != sizes[b].w) return sizes[a].w > sizes[b].w;
        return a < b;
    });
    return order;
}

}  // namespace

std::vector<std::optional<Position>> skyline_place(std::span<const Size2i> sizes, int canvas) {
    std::vector<std::optional<Position>> out(sizes.size());
    std::vector<Segment> sky{{0, canvas, 0}};
    std::vector<Segment> next;
    sky.reserve(2 * sizes.size() + 2);
    next.reserve(2 * sizes.size() + 2);

    for (std::size_t idx : placement_order(sizes)) {
        const Size2i r = sizes[idx];
        if (r.w <= 0 || r.h <= 0 || r.w > canvas || r.h > canvas) continue;

        int best_y = canvas + 1;
        int best_x = 0;
        std::size_t best_seg = sky.size();
        for (std::size_t s = 0; s < sky.size(); ++s) {
            const int x = sky[s].x;
            if (x + r.w > canvas) break;
            // Later starts have larger x, so only a strictly lower y can win.
            if (sky[s].y >= best_y) continue;
            int y = 0;
            int covered = 0;
            for (std::size_t t = s; t < sky.size() && covered < r.w && y < best_y; ++t) {
                y = std::max(y, sky[t].y);
                covered = sky[t].x + sky[t].w - x;
            }
            if (y >= best_y || y + r.h > canvas) continue;
            if (y < best_y || (y == best_y && x < best_x)) {
                best_y = y;
                best_x = x;
                best_seg = s;
            }
        }
        if (best_seg == sky.size()) continue;
        out[idx] = Position{best_x, best_y};

        // Raise the skyline over [best_x, best_x + w), merging equal-height neighbours.
        const int x0 = best_x;
        const int x1 = best_x + r.w;
        const Segment raised{x0, r.w, best_y + r.h};
        next.clear();
        auto push = [&next](const Segment& seg) {
            if (!next.empty() && next.back().y == seg.y) {
                next.back().w += seg.w;
            } else {
                next.push_back(seg);
            }
        };
        bool inserted = false;
        for (const Segment& seg : sky) {
            const int s0 = seg.x;
            const int s1 = seg.x + seg.w;
            if (s1 <= x0 || s0 >= x1) {
                if (s0 >= x1 && !inserted) {
                    push(raised);
                    inserted = true;
                }
                push(seg);
                continue;
            }
            if (s0 < x0) push({s0, x0 - s0, seg.y});
            if (!inserted) {
                push(raised);
                inserted = true;
            }
            if (s1 > x1) push({x1, s1 - x1, seg.y});
        }
        if (!inserted) push(raised);
        sky.swap(next);
    }
    return out;
}

std::optional<std::vector<Position>> place_rectangles(std::span<const Size2i> sizes, int canvas) {
    const auto placed = skyline_place(sizes, canvas);
    std::vector<Position> out;
    out.reserve(placed.size());
    for (const auto& p : placed) {
        if (!p) return std::nullopt;
        out.push_back(*p);
    }
    return out;
}

int even_round(double v) { return std::max(2, 2 * static_cast<int>(std::lround(v / 2.0))); }

Size2i placed_size(const PackItem& item, double scale) {
    return {even_round(item.width * scale), even_round(item.height * scale)};
}

PackEvaluation evaluate_scales(std::span<const PackItem> items, std::span<const double> scales, int canvas,
                               double penalty, std::vector<std::optional<Position>>* positions) {
    PackEvaluation ev;
    std::vector<Size2i> sizes(items.size());
    double area = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const PackItem& it = items[i];
        ev.shortfall = std::max(ev.shortfall, it.elasticity * (it.max_scale - scales[i]));
        sizes[i] = placed_size(it, scales[i]);
        area += static_cast<double>(sizes[i].w) * sizes[i].h;
    }
    const double canvas_area = static_cast<double>(canvas) * canvas;
    if (area > canvas_area) {
        // Rejected before placement: count the items past the area budget in placement order.
        ev.overflow = (area - canvas_area) / canvas_area;
        double running = 0.0;
        for (std::size_t idx : placement_order(sizes)) {
            running += static_cast<double>(sizes[idx].w) * sizes[idx].h;
            if (running > canvas_area) ++ev.unplaced;
        }
        if (positions) positions->assign(items.size(), std::nullopt);
    } else {
        auto placed = skyline_place(sizes, canvas);
        ev.unplaced = static_cast<int>(std::count(placed.begin(), placed.end(), std::nullopt));
        if (positions) *positions = std::move(placed);
    }
    ev.fitness = ev.shortfall + penalty * (ev.unplaced + ev.overflow);
    return ev;
}

std::vector<PackItem> relax_bounds(std::span<const PackItem> items, double factor) {
    if (!(factor > 0.0 && factor < 1.0)) throw std::invalid_argument("relax_bounds: factor must lie in (0, 1)");
    std::vector<PackItem> out(items.begin(), items.end());
    for (PackItem& it : out) {
        const double shorter = std::min(it.width, it.height);
        const double floor_scale = shorter > 0.0 ? kMinPlacedSide / shorter : 0.0;
        it.min_scale = std::max(it.min_scale * (1.0 - factor), floor_scale);
        it.max_scale = std::max(it.max_scale, it.min_scale);
    }
    return out;
}

namespace {

struct Individual {
    std::vector<double> scales;
    PackEvaluation eval;
};

// Common-shortfall ("water level") vector: every item sits lambda / elasticity below its maximum.
std::vector<double> level_vector(std::span<const PackItem> items, double lambda) {
    std::vector<double> s(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const PackItem& it = items[i];
        s[i] = std::clamp(it.max_scale - lambda / std::max(it.elasticity, 1e-9), it.min_scale, it.max_scale);
    }
    return s;
}

std::vector<std::vector<double>> seed_vectors(std::span<const PackItem> items, int canvas, double penalty) {
    std::vector<std::vector<double>> seeds;
    seeds.push_back(level_vector(items, 0.0));

    double top = 0.0;
    for (const PackItem& it : items) top = std::max(top, it.elasticity * (it.max_scale - it.min_scale));
    const auto floor_vec = level_vector(items, top);
    if (!evaluate_scales(items, floor_vec, canvas, penalty).feasible()) {
        seeds.push_back(floor_vec);
        return seeds;
    }
    double lo = 0.0;
    double hi = top;
    for (int iter = 0; iter < 30 && hi - lo > 1e-6; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (evaluate_scales(items, level_vector(items, mid), canvas, penalty).feasible()) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    seeds.push_back(level_vector(items, hi));
    return seeds;
}

struct SearchResult {
    Individual best;
    int generations = 0;
};

SearchResult differential_evolution(std::span<const PackItem> items, int canvas, const DeParams& p,
                                    std::mt19937_64& rng) {
    const std::size_t n = items.size();
    const std::size_t pop_size =
        static_cast<std::size_t>(p.population > 0 ? p.population : std::max<int>(20, 4 * static_cast<int>(n)));

    std::vector<Individual> pop(pop_size);
    const auto seeds = seed_vectors(items, canvas, p.penalty);
    for (std::size_t k = 0; k < pop_size; ++k) {
        if (k < seeds.size()) {
            pop[k].scales = seeds[k];
            continue;
        }
        pop[k].scales.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            pop[k].scales[i] = std::uniform_real_distribution<double>(items[i].min_scale, items[i].max_scale)(rng);
        }
    }
    parallel_for(pop_size, p.threads,
                 [&](std::size_t k) { pop[k].eval = evaluate_scales(items, pop[k].scales, canvas, p.penalty); });

    auto best_index = [&] {
        std::size_t b = 0;
        for (std::size_t k = 1; k < pop_size; ++k) {
            if (pop[k].eval.fitness < pop[b].eval.fitness) b = k;
        }
        return b;
    };

    std::size_t best = best_index();
    double best_fitness = pop[best].eval.fitness;
    int stall = 0;
    int gen = 0;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
    std::uniform_int_distribution<std::size_t> pick_dim(0, n - 1);
    std::vector<Individual> trials(pop_size);

    for (; gen < p.generations; ++gen) {
        if (pop[best].eval.fitness <= 0.0) break;
        if (pop[best].eval.feasible() && stall >= p.stall_generations) break;

        for (std::size_t k = 0; k < pop_size; ++k) {
            std::size_t r1, r2, r3;
            do { r1 = pick(rng); } while (r1 == k);
            do { r2 = pick(rng); } while (r2 == k || r2 == r1);
            do { r3 = pick(rng); } while (r3 == k || r3 == r1 || r3 == r2);
            const std::size_t jrand = pick_dim(rng);
            auto& trial = trials[k].scales;
            trial = pop[k].scales;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != jrand && unit(rng) >= p.CR) continue;
                double v = pop[r1].scales[j] + p.F * (pop[r2].scales[j] - pop[r3].scales[j]);
                // Bounce back inside the box instead of sticking to the bound.
                if (v < items[j].min_scale) v = items[j].min_scale + unit(rng) * (pop[k].scales[j] - items[j].min_scale);
                if (v > items[j].max_scale) v = items[j].max_scale - unit(rng) * (items[j].max_scale - pop[k].scales[j]);
                trial[j] = std::clamp(v, items[j].min_scale, items[j].max_scale);
            }
        }
        parallel_for(pop_size, p.threads, [&](std::size_t k) {
            trials[k].eval = evaluate_scales(items, trials[k].scales, canvas, p.penalty);
        });
        for (std::size_t k = 0; k < pop_size; ++k) {
            if (trials[k].eval.fitness <= pop[k].eval.fitness) std::swap(pop[k], trials[k]);
        }

        best = best_index();
        if (pop[best].eval.fitness < best_fitness - 1e-12) {
            best_fitness = pop[best].eval.fitness;
            stall = 0;
        } else {
            ++stall;
        }
    }
    return {pop[best], gen};
}

}  // namespace

CanvasLayout inverse_bin_pack(std::span<const PackItem> items, int canvas, const DeParams& params) {
    CanvasLayout layout;
    layout.canvas = canvas;
    if (items.empty()) return layout;
    for (const PackItem& it : items) {
        if (!(it.width > 0.0 && it.height > 0.0)) throw std::invalid_argument("inverse_bin_pack: item without area");
        if (it.min_scale > it.max_scale) throw std::invalid_argument("inverse_bin_pack: unordered bounds");
    }

    std::mt19937_64 rng(params.seed);
    std::vector<PackItem> current(items.begin(), items.end());
    const double canvas_area = static_cast<double>(canvas) * canvas;

    for (int round = 0;; ++round) {
        double floor_area = 0.0;
        for (const PackItem& it : current) {
            const Size2i s = placed_size(it, it.min_scale);
            floor_area += static_cast<double>(s.w) * s.h;
        }

        // Skip the search when even the lower bounds overflow the canvas.
        if (floor_area <= canvas_area) {
            SearchResult res = differential_evolution(current, canvas, params, rng);
            if (res.best.eval.feasible()) {
                std::vector<std::optional<Position>> pos;
                evaluate_scales(current, res.best.scales, canvas, params.penalty, &pos);
                layout.fitness = res.best.eval.fitness;
                layout.generations = res.generations;
                layout.relaxations = round;
                layout.relaxed = round > 0;
                layout.relaxation_factor = 1.0 - std::pow(1.0 - params.relaxation_step, round);
                for (std::size_t i = 0; i < current.size(); ++i) {
                    const Size2i sz = placed_size(current[i], res.best.scales[i]);
                    Placement pl;
                    pl.item = static_cast<int>(i);
                    pl.camera_id = current[i].camera_id;
                    pl.tile_id = current[i].tile_id;
                    pl.source = current[i].source;
                    pl.scale = res.best.scales[i];
                    pl.x = pos[i]->x;
                    pl.y = pos[i]->y;
                    pl.w = sz.w;
                    pl.h = sz.h;
                    layout.placements.push_back(pl);
                }
                return layout;
            }
        }
        if (round >= params.max_relaxations) {
            throw AdmissionControlError(static_cast<int>(items.size()), round,
                                        1.0 - std::pow(1.0 - params.relaxation_step, round));
        }
        current = relax_bounds(current, params.relaxation_step);
    }
}

}  // namespace mosaic
