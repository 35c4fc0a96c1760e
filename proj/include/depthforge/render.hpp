#pragma once

#include "depthforge/camera.hpp"
#include "depthforge/image.hpp"
#include "depthforge/mesh.hpp"

namespace depthforge {

// Z-buffer rasterization of the mesh through a pinhole camera. Each covered
// pixel (sampled at its center) ends up with the nearest camera-space depth
// among covering triangles; uncovered pixels stay +infinity. Depth across a
// triangle is perspective correct (1/d interpolated in screen space). No
// back-face culling: CAD meshes have inconsistent winding.
// Throws ZeroResolutionError when width or height is 0.
DepthBuffer render_depth(const Mesh& mesh, const CameraConfig& cfg, int width, int height);

}  // namespace depthforge
