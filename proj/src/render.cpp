#include "depthforge/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace depthforge {

namespace {

constexpr double kNearPlane = 1e-4;

struct ScreenVertex {
    double x;       // pixel coordinates
    double y;
    double inv_d;   // 1 / camera depth, interpolated linearly in screen space
};

// Clips a camera-space polygon against the z > kNearPlane half-space.
size_t clip_near(const Vec3* in, size_t n, Vec3* out) {
    size_t m = 0;
    for (size_t i = 0; i < n; ++i) {
        const Vec3& a = in[i];
        const Vec3& b = in[(i + 1) % n];
        const bool ain = a.z > kNearPlane;
        const bool bin = b.z > kNearPlane;
        if (ain) out[m++] = a;
        if (ain != bin) {
            const double t = (kNearPlane - a.z) / (b.z - a.z);
            out[m++] = a + (b - a) * t;
        }
    }
    return m;
}

double edge(const ScreenVertex& a, const ScreenVertex& b, double px, double py) {
    return (b.x - a.x) * (py - a.y) - (b.y - a.y) * (px - a.x);
}

void raster_triangle(DepthBuffer& buf, const ScreenVertex& v0, const ScreenVertex& v1,
                     const ScreenVertex& v2) {
    const double area = edge(v0, v1, v2.x, v2.y);
    if (area == 0.0) return;

    const double xmin = std::min({v0.x, v1.x, v2.x});
    const double xmax = std::max({v0.x, v1.x, v2.x});
    const double ymin = std::min({v0.y, v1.y, v2.y});
    const double ymax = std::max({v0.y, v1.y, v2.y});
    const int x0 = std::max(0, static_cast<int>(std::floor(xmin - 0.5)));
    const int x1 = std::min(buf.width - 1, static_cast<int>(std::ceil(xmax - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(ymin - 0.5)));
    const int y1 = std::min(buf.height - 1, static_cast<int>(std::ceil(ymax - 0.5)));

    for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
            const double px = x + 0.5;
            const double w0 = edge(v1, v2, px, py) / area;
            const double w1 = edge(v2, v0, px, py) / area;
            const double w2 = edge(v0, v1, px, py) / area;
            if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
            const double inv_d = w0 * v0.inv_d + w1 * v1.inv_d + w2 * v2.inv_d;
            if (inv_d <= 0.0) continue;
            const float d = static_cast<float>(1.0 / inv_d);
            float& z = buf.at(x, y);
            if (d < z) z = d;
        }
    }
}

}  // namespace

DepthBuffer render_depth(const Mesh& mesh, const CameraConfig& cfg, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw ZeroResolutionError("render resolution must be positive, got " +
                                  std::to_string(width) + "x" + std::to_string(height));
    }
    validate_mesh(mesh, /*renderable=*/true);
    const Camera cam = camera_from_config(cfg, 1.0);

    // Screen mapping: camera x/(z*tan_half) in [-aspect, aspect] spans the width,
    // y/(z*tan_half) in [-1, 1] spans the height, +y of the camera is row 0.
    const double half_h = height / 2.0;
    const double half_w = width / 2.0;
    const double scale = half_h / cam.tan_half_fov;

    DepthBuffer buf(width, height);
    std::array<Vec3, 4> cam_poly;
    std::array<Vec3, 8> clipped;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) cam_poly[k] = cam.to_camera(mesh.vertices[tri[k]]);
        const size_t n = clip_near(cam_poly.data(), 3, clipped.data());
        if (n < 3) continue;
        std::array<ScreenVertex, 8> sv;
        for (size_t k = 0; k < n; ++k) {
            const Vec3& p = clipped[k];
            sv[k] = {half_w + scale * (p.x / p.z), half_h - scale * (p.y / p.z), 1.0 / p.z};
        }
        for (size_t k = 1; k + 1 < n; ++k) raster_triangle(buf, sv[0], sv[k], sv[k + 1]);
    }
    return buf;
}

}  // namespace depthforge
