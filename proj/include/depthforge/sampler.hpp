#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthforge/camera.hpp"
#include "depthforge/image.hpp"
#include "depthforge/rng.hpp"

namespace depthforge {

class ImageTooSmallError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// The render schedule for one model: `count` independent draws from the
// configuration space, reproducible from (seed, model_id).
struct RenderPlan {
    std::string model_id;
    std::uint64_t seed = 0;
    std::vector<CameraConfig> configs;
};

// Draws count configs: distance ~ U[1.8, 3.5], fov ~ U[30, 60], sphere_dir
// area-uniform on the sphere, morph scales ~ U[0.92, 1.08] per axis.
RenderPlan sample_configs(const std::string& model_id, int count, std::uint64_t seed);

struct Hash64 {
    std::uint64_t bits = 0;
};

inline int hamming(Hash64 a, Hash64 b) {
    return std::popcount(a.bits ^ b.bits);
}

// Difference hash: box-average to 9x8, bit(r,c) = 1 iff avg(r,c) < avg(r,c+1).
// Throws ImageTooSmallError below 9x8.
Hash64 perceptual_hash(const DepthImage& img);

struct DedupResult {
    std::vector<size_t> kept;  // indices into the input, ascending
    double near_duplicate_fraction = 0.0;
};

// Greedy first-seen-wins scan: drop an image iff its Hamming distance to any
// already-kept image is <= threshold.
DedupResult dedup(const std::vector<Hash64>& hashes, int threshold);

struct DedupReportRow {
    std::string model_id;
    size_t total = 0;
    size_t kept = 0;
    double near_duplicate_fraction = 0.0;
};

// CSV with header: model_id,total,kept,near_duplicate_fraction
std::string dedup_report_csv(const std::vector<DedupReportRow>& rows);

}  // namespace depthforge
