#pragma once

#include <cstdint>
#include <vector>

#include "deskew/errors.hpp"

namespace deskew {

/// 8-bit luminance raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
        if (w < 1 || h < 1)
            throw ValidationError("GrayImage dimensions must be >= 1");
    }

    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

/// Binary raster, 1 = foreground ink.
struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels; // values 0 or 1

    BinaryImage() = default;
    BinaryImage(int w, int h)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, 0) {
        if (w < 1 || h < 1)
            throw ValidationError("BinaryImage dimensions must be >= 1");
    }

    std::uint8_t& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    std::size_t foreground_count() const {
        std::size_t n = 0;
        for (auto p : pixels) n += p;
        return n;
    }

    bool operator==(const BinaryImage&) const = default;
};

} // namespace deskew
