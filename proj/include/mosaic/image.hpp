#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mosaic {

/// Row-major 8-bit grayscale raster.
struct GrayFrame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;

    GrayFrame() = default;
    GrayFrame(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
        if (w < 0 || h < 0) throw std::invalid_argument("GrayFrame: negative dimensions");
    }

    std::uint8_t at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
    bool empty() const { return data.empty(); }

    bool operator==(const GrayFrame&) const = default;
};

}  // namespace mosaic
