#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace depthforge {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ZeroResolutionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class AllBackgroundError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint8_t kBackgroundGray = 255;
inline constexpr std::uint8_t kObjectGrayMax = 230;

// Per-pixel camera-space distance along the view axis; background = +infinity.
struct DepthBuffer {
    int width = 0;
    int height = 0;
    std::vector<float> depth;  // row-major, width*height

    DepthBuffer() = default;
    DepthBuffer(int w, int h)
        : width(w), height(h),
          depth(static_cast<size_t>(w) * h, std::numeric_limits<float>::infinity()) {}

    float& at(int x, int y) { return depth[static_cast<size_t>(y) * width + x]; }
    float at(int x, int y) const { return depth[static_cast<size_t>(y) * width + x]; }
};

// 8-bit depth image: black is close, white is far, background fixed at 255.
struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> gray;  // row-major, width*height

    DepthImage() = default;
    DepthImage(int w, int h, std::uint8_t fill = kBackgroundGray)
        : width(w), height(h), gray(static_cast<size_t>(w) * h, fill) {}

    std::uint8_t& at(int x, int y) { return gray[static_cast<size_t>(y) * width + x]; }
    std::uint8_t at(int x, int y) const { return gray[static_cast<size_t>(y) * width + x]; }
};

// Quantize: per-image min/max over finite depths, gray = round(230*(d-dmin)/(dmax-dmin)),
// background 255. Throws AllBackgroundError when no pixel is finite.
DepthImage depth_to_image(const DepthBuffer& buf);

// Raw float32 dump for oracle tooling: 8-byte magic "DFDEPTH1", uint32 width,
// uint32 height (little endian), then width*height little-endian floats.
void save_depth_buffer(const DepthBuffer& buf, const std::filesystem::path& path);
DepthBuffer load_depth_buffer(const std::filesystem::path& path);

}  // namespace depthforge
