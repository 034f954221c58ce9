// AABB tree over mesh triangles: globally nearest surface point with
// brute-force-identical results (lowest face index on exact distance ties),
// plus ray queries for containment tests and voxel fill.
#pragma once

#include <optional>
#include <vector>

#include "kitbash/mesh.hpp"

namespace kitbash {

// Closest point on a mesh together with the surface normal there. Normals at
// edge/vertex projections blend incident face normals (angle-weighted at
// vertices); interior projections use the face normal.
struct Projection {
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();
  int face_index = -1;
  double squared_distance = 0.0;
};

// Closest point on one triangle. region: 0-2 vertex, 3-5 edge (v0v1, v1v2,
// v2v0), 6 interior.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, int* region);

class Bvh {
 public:
  // Validates the mesh and keeps a copy.
  explicit Bvh(const TriMesh& mesh);

  const TriMesh& mesh() const { return mesh_; }
  const Aabb& bounds() const { return nodes_[0].box; }
  int leaf_count() const { return leaf_count_; }

  Projection closest_point(const Vec3& query) const;
  double distance(const Vec3& query) const;

  // Number of triangle hits with ray parameter t > t_min. Shared-edge grazing
  // can double count; callers vote over jittered directions.
  int count_ray_crossings(const Vec3& origin, const Vec3& dir,
                          double t_min) const;
  // Smallest hit parameter > t_min, if any.
  std::optional<double> first_ray_hit(const Vec3& origin, const Vec3& dir,
                                      double t_min) const;
  // All hit parameters > t_min, unsorted.
  void ray_hits(const Vec3& origin, const Vec3& dir, double t_min,
                std::vector<double>& ts) const;

  // Original indices of faces whose AABB overlaps `box`.
  void collect_overlapping(const Aabb& box, std::vector<int>& faces) const;

 private:
  struct Node {
    Aabb box;
    int left = -1;   // internal: child index; leaf: -1
    int right = -1;
    int first = 0;   // leaf: range into prim_
    int count = 0;
  };

  int build(std::vector<int>& prims, int begin, int end);
  Vec3 vertex_normal(int vertex) const;
  Vec3 edge_normal(int va, int vb, int fallback_face) const;
  Vec3 projection_normal(int face, int region) const;

  TriMesh mesh_;
  std::vector<Node> nodes_;
  std::vector<int> prim_;           // face indices, leaf-ordered
  std::vector<Vec3> face_normals_;
  std::vector<std::vector<int>> vertex_faces_;
  int leaf_count_ = 0;
};

}  // namespace kitbash
