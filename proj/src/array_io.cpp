#include "depthforge/array_io.hpp"

#include <cstring>
#include <fstream>
#include <numeric>

#include "depthforge/image.hpp"

namespace depthforge {

namespace {
constexpr char kMagic[8] = {'D', 'F', 'N', 'E', 'T', '1', '\0', '\0'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::filesystem::path& path) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    if (!in) throw IoError("truncated array file: " + path.string());
    return v;
}
}  // namespace

void save_arrays(const std::vector<NamedArray>& arrays, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(arrays.size()));
    for (const auto& a : arrays) {
        put_u32(out, static_cast<std::uint32_t>(a.name.size()));
        out.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
        put_u32(out, static_cast<std::uint32_t>(a.shape.size()));
        for (std::uint32_t d : a.shape) put_u32(out, d);
        const std::uint64_t n = std::accumulate(a.shape.begin(), a.shape.end(),
                                                std::uint64_t{1}, std::multiplies<>{});
        if (n != a.data.size()) {
            throw IoError("array " + a.name + " shape/data mismatch");
        }
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(float)));
    }
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<NamedArray> load_arrays(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
        throw IoError("bad model file magic: " + path.string());
    }
    const std::uint32_t count = get_u32(in, path);
    std::vector<NamedArray> arrays(count);
    for (auto& a : arrays) {
        const std::uint32_t name_len = get_u32(in, path);
        a.name.resize(name_len);
        in.read(a.name.data(), name_len);
        const std::uint32_t ndim = get_u32(in, path);
        a.shape.resize(ndim);
        std::uint64_t n = 1;
        for (auto& d : a.shape) {
            d = get_u32(in, path);
            n *= d;
        }
        a.data.resize(n);
        in.read(reinterpret_cast<char*>(a.data.data()),
                static_cast<std::streamsize>(n * sizeof(float)));
        if (!in) throw IoError("truncated array payload in " + path.string());
    }
    return arrays;
}

}  // namespace depthforge
