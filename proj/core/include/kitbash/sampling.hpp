// Surface sampling and vector-distance-field snapshots.
#pragma once

#include <cstdint>
#include <vector>

#include "kitbash/bvh.hpp"
#include "kitbash/mesh.hpp"

namespace kitbash {

struct SurfaceSample {
  Vec3 position = Vec3::Zero();
  int face_index = -1;
  Vec3 barycentric = Vec3::Zero();
};

// Area-weighted stratified samples, deterministic for a fixed seed. When
// count >= vertex count the first samples are exactly the mesh vertices.
std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, int count,
                                          std::uint64_t seed);

// Offset field of a point set against a reference mesh: offsets point from
// each sample toward its closest point on the reference surface; normals are
// the reference-surface normals at those closest points.
struct VdfSnapshot {
  std::vector<SurfaceSample> samples;
  std::vector<Vec3> offsets;
  std::vector<Vec3> normals;

  std::size_t size() const { return samples.size(); }
};

VdfSnapshot compute_vdf(const std::vector<SurfaceSample>& part_samples,
                        const Bvh& parent);

// Symmetric chamfer distance between surfaces: mean point-to-surface distance
// over fixed-seed samples, averaged over both directions.
double mesh_distance(const TriMesh& a, const TriMesh& b,
                     int samples_per_mesh = 1024,
                     std::uint64_t seed = 0x5eed5a17);

// Minimum sample-to-surface distance over both directions; the contact
// proximity used by the connectivity metric.
double min_surface_gap(const TriMesh& a, const TriMesh& b,
                       int samples_per_mesh = 1024,
                       std::uint64_t seed = 0x5eed5a17);

}  // namespace kitbash
