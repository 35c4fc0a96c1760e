#pragma once

#include <stdexcept>

#include "depthforge/geometry.hpp"
#include "depthforge/mesh.hpp"

namespace depthforge {

class CameraConfigError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// One point in the rendering configuration space: distance from the object
// (in bounding-sphere radii), vertical field of view, position on the viewing
// sphere, and a per-render mesh morph.
struct CameraConfig {
    double distance = 2.5;      // multiples of the bounding-sphere radius
    double fov_deg = 45.0;      // vertical field of view
    Vec3 sphere_dir{0, -1, 0};  // unit direction from origin to the camera
    MorphParams morph;
};

// Throws CameraConfigError when distance is outside [1.8, 3.5], fov_deg is
// outside [30, 60], or sphere_dir is not unit length within 1e-9.
void validate_camera_config(const CameraConfig& cfg);

// World-space pinhole camera: orthonormal (side, up, forward) basis looking
// at the origin, with the vertical half-angle tangent for projection.
struct Camera {
    Vec3 eye;
    Vec3 forward;  // unit, towards the origin
    Vec3 side;     // unit, image +x
    Vec3 up;       // unit, image +y (towards row 0)
    double tan_half_fov = 0.0;

    // Camera-space position: x along side, y along up, z = depth along forward.
    Vec3 to_camera(const Vec3& p) const {
        const Vec3 r = p - eye;
        return {dot(r, side), dot(r, up), dot(r, forward)};
    }
};

// Places the camera at cfg.distance * radius along sphere_dir, looking at the
// origin. Up vector is world +Z, replaced by world +Y when |sphere_dir.z| > 0.999.
Camera camera_from_config(const CameraConfig& cfg, double radius);

}  // namespace depthforge
