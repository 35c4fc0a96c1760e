#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace depthforge {

// Named flat float arrays, the on-disk model container (network weights,
// classifier models). Binary layout: 8-byte magic "DFNET1\0\0", uint32 array
// count; per array: uint32 name length, name bytes, uint32 ndim, uint32 dims,
// then little-endian float32 payload.
struct NamedArray {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> data;
};

void save_arrays(const std::vector<NamedArray>& arrays, const std::filesystem::path& path);
std::vector<NamedArray> load_arrays(const std::filesystem::path& path);

}  // namespace depthforge
