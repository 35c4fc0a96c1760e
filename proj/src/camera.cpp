#include "depthforge/camera.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace depthforge {

void validate_camera_config(const CameraConfig& cfg) {
    if (!(cfg.distance >= 1.8 && cfg.distance <= 3.5)) {
        throw CameraConfigError("camera distance " + std::to_string(cfg.distance) +
                                " outside [1.8, 3.5]");
    }
    if (!(cfg.fov_deg >= 30.0 && cfg.fov_deg <= 60.0)) {
        throw CameraConfigError("camera fov " + std::to_string(cfg.fov_deg) + " outside [30, 60]");
    }
    const double n = norm(cfg.sphere_dir);
    if (std::abs(n - 1.0) > 1e-9) {
        throw CameraConfigError("sphere_dir norm " + std::to_string(n) + " is not 1");
    }
}

Camera camera_from_config(const CameraConfig& cfg, double radius) {
    validate_camera_config(cfg);
    if (!(radius > 0.0)) throw CameraConfigError("bounding radius must be positive");
    Camera cam;
    cam.eye = cfg.sphere_dir * (cfg.distance * radius);
    cam.forward = normalized(cfg.sphere_dir * -1.0);
    const Vec3 up0 = std::abs(dot(cfg.sphere_dir, Vec3{0, 0, 1})) > 0.999 ? Vec3{0, 1, 0}
                                                                          : Vec3{0, 0, 1};
    cam.side = normalized(cross(cam.forward, up0));
    cam.up = cross(cam.side, cam.forward);
    cam.tan_half_fov = std::tan(cfg.fov_deg * std::numbers::pi / 360.0);
    return cam;
}

}  // namespace depthforge
