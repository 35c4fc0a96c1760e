#include "depthforge/image.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

namespace depthforge {

static_assert(std::endian::native == std::endian::little,
              "raw depth dumps assume a little-endian host");

DepthImage depth_to_image(const DepthBuffer& buf) {
    float dmin = std::numeric_limits<float>::infinity();
    float dmax = -std::numeric_limits<float>::infinity();
    for (float d : buf.depth) {
        if (!std::isfinite(d)) continue;
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if (!std::isfinite(dmin)) {
        throw AllBackgroundError("depth buffer has no finite pixels");
    }
    DepthImage img(buf.width, buf.height);
    const double range = static_cast<double>(dmax) - static_cast<double>(dmin);
    for (size_t i = 0; i < buf.depth.size(); ++i) {
        const float d = buf.depth[i];
        if (!std::isfinite(d)) continue;
        if (range <= 0.0) {
            img.gray[i] = 0;
        } else {
            const double g = std::round(230.0 * (static_cast<double>(d) - dmin) / range);
            img.gray[i] = static_cast<std::uint8_t>(g);
        }
    }
    return img;
}

namespace {
constexpr char kDepthMagic[8] = {'D', 'F', 'D', 'E', 'P', 'T', 'H', '1'};
}

void save_depth_buffer(const DepthBuffer& buf, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kDepthMagic, sizeof(kDepthMagic));
    const std::uint32_t w = static_cast<std::uint32_t>(buf.width);
    const std::uint32_t h = static_cast<std::uint32_t>(buf.height);
    out.write(reinterpret_cast<const char*>(&w), 4);
    out.write(reinterpret_cast<const char*>(&h), 4);
    out.write(reinterpret_cast<const char*>(buf.depth.data()),
              static_cast<std::streamsize>(buf.depth.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path.string());
}

DepthBuffer load_depth_buffer(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kDepthMagic, sizeof(magic)) != 0) {
        throw IoError("bad depth dump magic: " + path.string());
    }
    std::uint32_t w = 0, h = 0;
    in.read(reinterpret_cast<char*>(&w), 4);
    in.read(reinterpret_cast<char*>(&h), 4);
    if (!in) throw IoError("truncated depth dump header: " + path.string());
    DepthBuffer buf(static_cast<int>(w), static_cast<int>(h));
    in.read(reinterpret_cast<char*>(buf.depth.data()),
            static_cast<std::streamsize>(buf.depth.size() * sizeof(float)));
    if (!in) throw IoError("truncated depth dump payload: " + path.string());
    return buf;
}

}  // namespace depthforge
