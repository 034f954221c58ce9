// Indexed triangle mesh plus the handful of whole-mesh queries the solvers
// need (bounds, centroids, validation).
#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "kitbash/errors.hpp"
#include "kitbash/lie.hpp"
#include "kitbash/types.hpp"

namespace kitbash {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }

  Vec3 face_normal(int f) const;
  double face_area(int f) const;
  // Total surface area.
  double area() const;

  TriMesh transformed(const RigidTransform& t) const;
};

// Throws InvalidMesh unless: >= 3 vertices, >= 1 face, all indices in range,
// and no face with area <= 1e-12 after scaling the mesh to unit bbox diagonal.
void validate_mesh(const TriMesh& mesh);

struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  void expand(const Vec3& p);
  void expand(const Aabb& o);
  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return extent().norm(); }
  double volume() const;
  bool overlaps(const Aabb& o) const;
  // Squared distance from a point to this box (0 inside).
  double squared_distance(const Vec3& p) const;
};

Aabb aabb(const TriMesh& mesh);
double bbox_diagonal(const TriMesh& mesh);

// Area-weighted centroid of the surface.
Vec3 surface_centroid(const TriMesh& mesh);

// Signed volume and volume centroid by the divergence theorem; meaningful for
// closed, consistently wound meshes. Falls back to the surface centroid with
// zero volume when |volume| is negligible.
std::pair<double, Vec3> volume_centroid(const TriMesh& mesh);

// True when every edge is shared by exactly two faces.
bool is_closed(const TriMesh& mesh);

}  // namespace kitbash
