#include "kitbash/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kitbash/rng.hpp"

namespace kitbash {

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, int count,
                                          std::uint64_t seed) {
  validate_mesh(mesh);
  if (count < 1) throw ValidationError("sample_surface: count must be >= 1");

  std::vector<SurfaceSample> out;
  out.reserve(count);

  const int nv = static_cast<int>(mesh.vertex_count());
  int remaining = count;
  if (count >= nv) {
    // Vertex mode: emit every vertex first, tagged with one incident face.
    std::vector<int> vertex_face(nv, -1);
    for (int f = static_cast<int>(mesh.face_count()) - 1; f >= 0; --f)
      for (int k = 0; k < 3; ++k) vertex_face[mesh.faces[f][k]] = f;
    for (int v = 0; v < nv; ++v) {
      SurfaceSample s;
      s.position = mesh.vertices[v];
      s.face_index = vertex_face[v];
      if (s.face_index >= 0) {
        const auto& tri = mesh.faces[s.face_index];
        for (int k = 0; k < 3; ++k)
          if (tri[k] == v) s.barycentric[k] = 1.0;
      }
      out.push_back(s);
    }
    remaining = count - nv;
  }
  if (remaining == 0) return out;

  // Stratified allocation: floor of the area quota per face, then largest
  // fractional remainders.
  const int nf = static_cast<int>(mesh.face_count());
  std::vector<double> areas(nf);
  double total = 0.0;
  for (int f = 0; f < nf; ++f) {
    areas[f] = mesh.face_area(f);
    total += areas[f];
  }
  std::vector<int> alloc(nf, 0);
  std::vector<std::pair<double, int>> fracs(nf);
  int assigned = 0;
  for (int f = 0; f < nf; ++f) {
    const double quota = remaining * areas[f] / total;
    alloc[f] = static_cast<int>(std::floor(quota));
    assigned += alloc[f];
    fracs[f] = {quota - alloc[f], f};
  }
  std::sort(fracs.begin(), fracs.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (int i = 0; i < remaining - assigned; ++i) ++alloc[fracs[i].second];

  Rng rng(seed);
  for (int f = 0; f < nf; ++f) {
    const auto& tri = mesh.faces[f];
    for (int i = 0; i < alloc[f]; ++i) {
      const double su = std::sqrt(rng.uniform());
      const double v = rng.uniform();
      SurfaceSample s;
      s.barycentric = Vec3(1.0 - su, su * (1.0 - v), su * v);
      s.face_index = f;
      s.position = s.barycentric[0] * mesh.vertices[tri[0]] +
                   s.barycentric[1] * mesh.vertices[tri[1]] +
                   s.barycentric[2] * mesh.vertices[tri[2]];
      out.push_back(s);
    }
  }
  return out;
}

VdfSnapshot compute_vdf(const std::vector<SurfaceSample>& part_samples,
                        const Bvh& parent) {
  if (part_samples.empty()) throw EmptyInput("compute_vdf: no samples");
  VdfSnapshot snap;
  snap.samples = part_samples;
  snap.offsets.reserve(part_samples.size());
  snap.normals.reserve(part_samples.size());
  for (const SurfaceSample& s : part_samples) {
    const Projection proj = parent.closest_point(s.position);
    snap.offsets.push_back(proj.point - s.position);
    snap.normals.push_back(proj.normal);
  }
  return snap;
}

double mesh_distance(const TriMesh& a, const TriMesh& b, int samples_per_mesh,
                     std::uint64_t seed) {
  const Bvh bvh_a(a);
  const Bvh bvh_b(b);
  const auto sa = sample_surface(a, samples_per_mesh, seed);
  const auto sb = sample_surface(b, samples_per_mesh, seed);
  double ab = 0.0, ba = 0.0;
  for (const auto& s : sa) ab += bvh_b.distance(s.position);
  for (const auto& s : sb) ba += bvh_a.distance(s.position);
  return 0.5 * (ab / sa.size() + ba / sb.size());
}

double min_surface_gap(const TriMesh& a, const TriMesh& b,
                       int samples_per_mesh, std::uint64_t seed) {
  const Bvh bvh_a(a);
  const Bvh bvh_b(b);
  const auto sa = sample_surface(a, samples_per_mesh, seed);
  const auto sb = sample_surface(b, samples_per_mesh, seed);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& s : sa) gap = std::min(gap, bvh_b.distance(s.position));
  for (const auto& s : sb) gap = std::min(gap, bvh_a.distance(s.position));
  return gap;
}

}  // namespace kitbash
