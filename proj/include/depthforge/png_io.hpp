#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "depthforge/image.hpp"

namespace depthforge {

// 8-bit RGB raster for report charts.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h, std::uint8_t r = 255, std::uint8_t g = 255, std::uint8_t b = 255)
        : width(w), height(h), rgb(static_cast<size_t>(w) * h * 3) {
        for (size_t i = 0; i < rgb.size(); i += 3) {
            rgb[i] = r;
            rgb[i + 1] = g;
            rgb[i + 2] = b;
        }
    }

    void set(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
        const size_t i = (static_cast<size_t>(y) * width + x) * 3;
        rgb[i] = r;
        rgb[i + 1] = g;
        rgb[i + 2] = b;
    }
};

void save_png_gray8(const DepthImage& img, const std::filesystem::path& path);
void save_png_rgb8(const RgbImage& img, const std::filesystem::path& path);

// Loads any PNG as 8-bit grayscale (color converted, 16-bit narrowed, alpha dropped).
DepthImage load_png_gray8(const std::filesystem::path& path);

}  // namespace depthforge
