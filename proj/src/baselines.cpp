#include "mosaic/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace mosaic {

namespace {

double cell_scale(int w, int h, double cell_w, double cell_h) { return std::min(cell_w / w, cell_h / h); }

Placement letterbox(int camera_id, int w, int h, double scale, double cell_x, double cell_y, double cell_w,
                    double cell_h) {
    Placement p;
    p.item = camera_id;
    p.camera_id = camera_id;
    p.tile_id = 0;
    p.source = {0.0, 0.0, double(w), double(h)};
    p.scale = scale;
    p.w = std::max(1, static_cast<int>(std::floor(w * scale + 1e-9)));
    p.h = std::max(1, static_cast<int>(std::floor(h * scale + 1e-9)));
    p.x = static_cast<int>(std::floor(cell_x + (cell_w - p.w) / 2.0));
    p.y = static_cast<int>(std::floor(cell_y + (cell_h - p.h) / 2.0));
    return p;
}

void check_dims(int w, int h, int canvas) {
    if (w <= 0 || h <= 0 || canvas <= 0) throw std::invalid_argument("baseline layout: non-positive dimensions");
}

}  // namespace

CanvasLayout fcfs_layout(int frame_width, int frame_height, int canvas, int camera_id) {
    check_dims(frame_width, frame_height, canvas);
    CanvasLayout layout;
    layout.canvas = canvas;
    const double s = cell_scale(frame_width, frame_height, canvas, canvas);
    layout.placements.push_back(letterbox(camera_id, frame_width, frame_height, s, 0.0, 0.0, canvas, canvas));
    return layout;
}

const char* to_string(Arrangement a) {
    switch (a) {
        case Arrangement::grid: return "grid";
        case Arrangement::horizontal: return "horizontal";
        case Arrangement::vertical: return "vertical";
    }
    return "?";
}

UniformChoice choose_uniform(int cameras, int frame_width, int frame_height, int canvas) {
    if (cameras < 1) throw std::invalid_argument("uniform layout needs at least one camera");
    check_dims(frame_width, frame_height, canvas);
    UniformChoice best;
    best.scale = -1.0;
    auto consider = [&](Arrangement a, int rows, int cols) {
        const double s = cell_scale(frame_width, frame_height, double(canvas) / cols, double(canvas) / rows);
        if (s > best.scale) best = {a, rows, cols, s};
    };
    for (int rows = 1; rows <= cameras; ++rows) consider(Arrangement::grid, rows, (cameras + rows - 1) / rows);
    consider(Arrangement::horizontal, 1, cameras);
    consider(Arrangement::vertical, cameras, 1);
    return best;
}

CanvasLayout uniform_layout(int cameras, int frame_width, int frame_height, int canvas) {
    const UniformChoice c = choose_uniform(cameras, frame_width, frame_height, canvas);
    CanvasLayout layout;
    layout.canvas = canvas;
    const double cell_w = double(canvas) / c.cols;
    const double cell_h = double(canvas) / c.rows;
    for (int k = 0; k < cameras; ++k) {
        const int row = k / c.cols;
        const int col = k % c.cols;
        layout.placements.push_back(
            letterbox(k, frame_width, frame_height, c.scale, col * cell_w, row * cell_h, cell_w, cell_h));
    }
    return layout;
}

}  // namespace mosaic
