// Procedural test/demo meshes. All primitives are closed and consistently
// wound with outward normals.
#pragma once

#include "kitbash/mesh.hpp"

namespace kitbash {

// Axis-aligned box given center and full extents (12 triangles).
TriMesh make_box(const Vec3& center, const Vec3& extents);

// Axis-aligned box with each face subdivided into a grid (divisions per
// axis); watertight, shared vertices along edges.
TriMesh make_box_grid(const Vec3& center, const Vec3& extents,
                      const Eigen::Vector3i& divisions);

// UV sphere; rings >= 2, segments >= 3.
TriMesh make_uv_sphere(const Vec3& center, double radius, int segments = 24,
                       int rings = 12);

// Cylinder along +z from z0 to z1, capped.
TriMesh make_cylinder(const Vec3& base_center, double radius, double height,
                      int segments = 24);

// Open rectangular grid in the z = 0 plane, nx-by-ny cells over
// [-sx/2, sx/2] x [-sy/2, sy/2].
TriMesh make_plane(double sx, double sy, int nx = 1, int ny = 1);

// Concatenate meshes into one (indices re-based).
TriMesh merge_meshes(const std::vector<TriMesh>& meshes);

}  // namespace kitbash
