#pragma once

#include "depthforge/mesh.hpp"

namespace depthforge {

// Parametric triangle meshes centered at the origin. Used by the demo
// benchmark and by tests; all are plain triangle soups.

Mesh make_box(double half_x, double half_y, double half_z);

// Icosahedron subdivided `subdivisions` times, vertices projected to the
// unit sphere.
Mesh make_icosphere(int subdivisions);

// Cone with its base disk at z = -height/2 and apex at z = +height/2.
Mesh make_cone(double radius, double height, int segments);

// Capped cylinder along the z axis.
Mesh make_cylinder(double radius, double height, int segments);

// Torus in the xy plane: major_radius to the tube center, minor_radius of
// the tube.
Mesh make_torus(double major_radius, double minor_radius, int segments_major, int segments_minor);

}  // namespace depthforge
