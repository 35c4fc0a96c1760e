#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

#include "depthforge/geometry.hpp"

namespace depthforge {

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FaceArityError : MeshError {
    using MeshError::MeshError;
};
struct IndexOutOfRangeError : MeshError {
    using MeshError::MeshError;
};
struct MalformedNumberError : MeshError {
    using MeshError::MeshError;
};
struct DegenerateMeshError : MeshError {
    using MeshError::MeshError;
};
struct MorphOutOfRangeError : MeshError {
    using MeshError::MeshError;
};
struct UnsupportedFormatError : MeshError {
    using MeshError::MeshError;
};

// Triangle soup. Indices are 0-based in memory (OBJ's 1-based indices are
// converted on parse).
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
};

// Per-axis scale factors. The deviation from 1 is hard-capped at 10% on
// every axis.
struct MorphParams {
    std::array<double, 3> axis_scales{1.0, 1.0, 1.0};
};

inline constexpr double kMorphCap = 0.10;

// Parses the v/f subset of Wavefront OBJ. Faces with more than three
// vertices are fan-triangulated from the first vertex; negative indices
// resolve against the vertex count seen so far; vt/vn/material directives
// are ignored.
Mesh parse_obj(std::istream& in);
Mesh parse_obj(const std::string& text);

// Loads an .obj file. Any other extension is rejected with
// UnsupportedFormatError.
Mesh load_obj(const std::filesystem::path& path);

std::string serialize_obj(const Mesh& mesh);
void save_obj(const Mesh& mesh, const std::filesystem::path& path);

struct BoundingSphere {
    Vec3 center;
    double radius = 0;
};

// Sphere centered at the vertex centroid with radius the max centroid
// distance. Not the minimal enclosing sphere; cheap and deterministic,
// which is what the distance units of the render config space need.
BoundingSphere bounding_sphere(const Mesh& mesh);

// Translates and uniformly scales so bounding_sphere(result) = (origin, 1).
Mesh normalize_mesh(const Mesh& mesh);

// Multiplies every vertex coordinate by the matching axis scale.
Mesh morph_mesh(const Mesh& mesh, const MorphParams& params);

// Throws if indices are out of range, coordinates are non-finite, or
// (when renderable is true) the triangle list is empty.
void validate_mesh(const Mesh& mesh, bool renderable = true);

}  // namespace depthforge
