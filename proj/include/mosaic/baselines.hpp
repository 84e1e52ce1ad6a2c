#pragma once

#include <string>

#include "mosaic/packer.hpp"

namespace mosaic {

/// Whole frame scaled to fit C x C with its aspect ratio kept, centred.
CanvasLayout fcfs_layout(int frame_width, int frame_height, int canvas, int camera_id = 0);

enum class Arrangement { grid, horizontal, vertical };
const char* to_string(Arrangement a);

struct UniformChoice {
    Arrangement arrangement = Arrangement::grid;
    int rows = 1;
    int cols = 1;
    double scale = 0.0;
};

/// Best of every rows x ceil(M / rows) grid, then 1 x M and M x 1 stacks.
/// Earlier candidates win ties.
UniformChoice choose_uniform(int cameras, int frame_width, int frame_height, int canvas);

/// Equal cells, each holding one letterboxed frame; camera k sits in row k / cols, column k % cols.
CanvasLayout uniform_layout(int cameras, int frame_width, int frame_height, int canvas);

}  // namespace mosaic
