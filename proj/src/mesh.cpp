#include "depthforge/mesh.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace depthforge {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
        size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

double parse_double(std::string_view tok, int line_no) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v)) {
        throw MalformedNumberError("mesh_io: malformed number '" + std::string(tok) + "' at line " +
                                   std::to_string(line_no));
    }
    return v;
}

// A face vertex may be i, i/j, i/j/k or i//k; only the position index is used.
int parse_face_index(std::string_view tok, size_t vertex_count, int line_no) {
    const size_t slash = tok.find('/');
    if (slash != std::string_view::npos) tok = tok.substr(0, slash);
    long idx = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), idx);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        throw MalformedNumberError("mesh_io: malformed face index '" + std::string(tok) +
                                   "' at line " + std::to_string(line_no));
    }
    long resolved;
    if (idx > 0) {
        resolved = idx - 1;
    } else if (idx < 0) {
        resolved = static_cast<long>(vertex_count) + idx;
    } else {
        throw IndexOutOfRangeError("mesh_io: face index 0 at line " + std::to_string(line_no));
    }
    if (resolved < 0 || resolved >= static_cast<long>(vertex_count)) {
        throw IndexOutOfRangeError("mesh_io: face index " + std::to_string(idx) +
                                   " out of range at line " + std::to_string(line_no));
    }
    return static_cast<int>(resolved);
}

}  // namespace

Mesh parse_obj(std::istream& in) {
    Mesh mesh;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto toks = split_ws(line);
        if (toks.empty() || toks[0][0] == '#') continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) {
                throw MalformedNumberError("mesh_io: vertex with fewer than 3 coordinates at line " +
                                           std::to_string(line_no));
            }
            mesh.vertices.push_back({parse_double(toks[1], line_no), parse_double(toks[2], line_no),
                                     parse_double(toks[3], line_no)});
        } else if (toks[0] == "f") {
            if (toks.size() < 4) {
                throw FaceArityError("mesh_io: face with fewer than 3 vertices at line " +
                                     std::to_string(line_no));
            }
            std::vector<int> idx;
            idx.reserve(toks.size() - 1);
            for (size_t t = 1; t < toks.size(); ++t) {
                idx.push_back(parse_face_index(toks[t], mesh.vertices.size(), line_no));
            }
            for (size_t k = 1; k + 1 < idx.size(); ++k) {
                mesh.triangles.push_back({idx[0], idx[k], idx[k + 1]});
            }
        }
        // vt, vn, vp, g, o, s, usemtl, mtllib and anything else: ignored.
    }
    validate_mesh(mesh, /*renderable=*/false);
    return mesh;
}

Mesh parse_obj(const std::string& text) {
    std::istringstream in(text);
    return parse_obj(in);
}

Mesh load_obj(const std::filesystem::path& path) {
    if (path.extension() != ".obj") {
        throw UnsupportedFormatError("mesh_io: unsupported model format '" +
                                     path.extension().string() + "' (only .obj is supported)");
    }
    std::ifstream in(path);
    if (!in) throw MeshError("mesh_io: cannot open '" + path.string() + "'");
    return parse_obj(in);
}

std::string serialize_obj(const Mesh& mesh) {
    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.triangles.size() * 16);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.17g %.17g %.17g\n", v.x, v.y, v.z);
        out += buf;
    }
    for (const auto& t : mesh.triangles) {
        std::snprintf(buf, sizeof(buf), "f %d %d %d\n", t[0] + 1, t[1] + 1, t[2] + 1);
        out += buf;
    }
    return out;
}

void save_obj(const Mesh& mesh, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MeshError("mesh_io: cannot write '" + path.string() + "'");
    out << serialize_obj(mesh);
}

BoundingSphere bounding_sphere(const Mesh& mesh) {
    if (mesh.vertices.empty()) throw DegenerateMeshError("mesh_io: empty mesh");
    Vec3 c{0, 0, 0};
    for (const auto& v : mesh.vertices) c += v;
    c = c / static_cast<double>(mesh.vertices.size());
    double r2 = 0;
    for (const auto& v : mesh.vertices) {
        const Vec3 d = v - c;
        r2 = std::max(r2, dot(d, d));
    }
    const double r = std::sqrt(r2);
    if (r <= 0) throw DegenerateMeshError("mesh_io: degenerate mesh (all vertices coincide)");
    return {c, r};
}

Mesh normalize_mesh(const Mesh& mesh) {
    const auto sphere = bounding_sphere(mesh);
    Mesh out;
    out.triangles = mesh.triangles;
    out.vertices.reserve(mesh.vertices.size());
    const double inv_r = 1.0 / sphere.radius;
    for (const auto& v : mesh.vertices) out.vertices.push_back((v - sphere.center) * inv_r);
    return out;
}

Mesh morph_mesh(const Mesh& mesh, const MorphParams& params) {
    for (const double s : params.axis_scales) {
        // Tiny slack so the nominal boundary values 0.9 / 1.1 are accepted
        // despite decimal-to-binary rounding.
        if (!(s > 0) || std::abs(s - 1.0) > kMorphCap + 1e-12) {
            throw MorphOutOfRangeError("mesh_io: morph scale " + std::to_string(s) +
                                       " outside [0.90, 1.10]");
        }
    }
    Mesh out;
    out.triangles = mesh.triangles;
    out.vertices.reserve(mesh.vertices.size());
    const auto& s = params.axis_scales;
    for (const auto& v : mesh.vertices) out.vertices.push_back({v.x * s[0], v.y * s[1], v.z * s[2]});
    return out;
}

void validate_mesh(const Mesh& mesh, bool renderable) {
    const int n = static_cast<int>(mesh.vertices.size());
    for (const auto& v : mesh.vertices) {
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) {
            throw MalformedNumberError("mesh_io: non-finite vertex coordinate");
        }
    }
    for (const auto& t : mesh.triangles) {
        for (const int i : t) {
            if (i < 0 || i >= n) {
                throw IndexOutOfRangeError("mesh_io: triangle index " + std::to_string(i) +
                                           " out of range");
            }
        }
    }
    if (renderable && mesh.triangles.empty()) {
        throw DegenerateMeshError("mesh_io: mesh has no triangles");
    }
}

}  // namespace depthforge
