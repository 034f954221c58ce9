#include "kitbash/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kitbash {

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b,
                               const Vec3& c, int* region) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    *region = 0;
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    *region = 1;
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    *region = 3;
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    *region = 2;
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    *region = 5;
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    *region = 4;
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = 1.0 / (va + vb + vc);
  *region = 6;
  return a + ab * (vb * denom) + ac * (vc * denom);
}

Bvh::Bvh(const TriMesh& mesh) : mesh_(mesh) {
  validate_mesh(mesh_);
  const int nf = static_cast<int>(mesh_.face_count());
  face_normals_.resize(nf);
  for (int f = 0; f < nf; ++f) face_normals_[f] = mesh_.face_normal(f);
  vertex_faces_.resize(mesh_.vertex_count());
  for (int f = 0; f < nf; ++f)
    for (int k = 0; k < 3; ++k) vertex_faces_[mesh_.faces[f][k]].push_back(f);

  prim_.resize(nf);
  for (int f = 0; f < nf; ++f) prim_[f] = f;
  nodes_.reserve(2 * nf);
  build(prim_, 0, nf);
}

int Bvh::build(std::vector<int>& prims, int begin, int end) {
  const int node_index = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  Aabb box;
  Aabb centroid_box;
  for (int i = begin; i < end; ++i) {
    const auto& tri = mesh_.faces[prims[i]];
    Aabb fb;
    for (int k = 0; k < 3; ++k) fb.expand(mesh_.vertices[tri[k]]);
    box.expand(fb);
    centroid_box.expand(fb.center());
  }
  nodes_[node_index].box = box;

  const int count = end - begin;
  if (count <= 4) {
    nodes_[node_index].first = begin;
    nodes_[node_index].count = count;
    ++leaf_count_;
    return node_index;
  }

  int axis = 0;
  const Vec3 ext = centroid_box.extent();
  if (ext.y() > ext.x()) axis = 1;
  if (ext.z() > ext[axis]) axis = 2;

  // Median split with a total order (centroid, face index) so the structure
  // is deterministic for a given mesh.
  std::sort(prims.begin() + begin, prims.begin() + end, [&](int fa, int fb) {
    const auto centroid = [&](int f) {
      const auto& tri = mesh_.faces[f];
      return (mesh_.vertices[tri[0]] + mesh_.vertices[tri[1]] +
              mesh_.vertices[tri[2]]) / 3.0;
    };
    const double ca = centroid(fa)[axis], cb = centroid(fb)[axis];
    if (ca != cb) return ca < cb;
    return fa < fb;
  });
  const int mid = begin + count / 2;
  const int left = build(prims, begin, mid);
  const int right = build(prims, mid, end);
  nodes_[node_index].left = left;
  nodes_[node_index].right = right;
  return node_index;
}

Vec3 Bvh::vertex_normal(int vertex) const {
  Vec3 acc = Vec3::Zero();
  for (int f : vertex_faces_[vertex]) {
    const auto& tri = mesh_.faces[f];
    int corner = 0;
    for (int k = 0; k < 3; ++k)
      if (tri[k] == vertex) corner = k;
    const Vec3& v = mesh_.vertices[vertex];
    Vec3 e1 = mesh_.vertices[tri[(corner + 1) % 3]] - v;
    Vec3 e2 = mesh_.vertices[tri[(corner + 2) % 3]] - v;
    const double n1 = e1.norm(), n2 = e2.norm();
    if (n1 <= 0.0 || n2 <= 0.0) continue;
    const double angle =
        std::acos(std::clamp(e1.dot(e2) / (n1 * n2), -1.0, 1.0));
    acc += angle * face_normals_[f];
  }
  const double len = acc.norm();
  return len > 1e-12 ? Vec3(acc / len) : face_normals_[vertex_faces_[vertex][0]];
}

Vec3 Bvh::edge_normal(int va, int vb, int fallback_face) const {
  Vec3 acc = Vec3::Zero();
  int found = 0;
  for (int f : vertex_faces_[va]) {
    const auto& tri = mesh_.faces[f];
    if (tri[0] == vb || tri[1] == vb || tri[2] == vb) {
      acc += face_normals_[f];
      ++found;
    }
  }
  if (found == 0) return face_normals_[fallback_face];
  const double len = acc.norm();
  return len > 1e-12 ? Vec3(acc / len) : face_normals_[fallback_face];
}

Vec3 Bvh::projection_normal(int face, int region) const {
  const auto& tri = mesh_.faces[face];
  if (region == 6) return face_normals_[face];
  if (region < 3) return vertex_normal(tri[region]);
  const int a = tri[region - 3];
  const int b = tri[(region - 2) % 3];
  return edge_normal(a, b, face);
}

Projection Bvh::closest_point(const Vec3& query) const {
  Projection best;
  best.squared_distance = std::numeric_limits<double>::infinity();
  int best_region = 6;

  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (node.box.squared_distance(query) > best.squared_distance) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = prim_[i];
        const auto& tri = mesh_.faces[f];
        int region;
        const Vec3 cp = closest_point_on_triangle(
            query, mesh_.vertices[tri[0]], mesh_.vertices[tri[1]],
            mesh_.vertices[tri[2]], &region);
        const double d2 = (cp - query).squaredNorm();
        // Lowest face index wins exact distance ties.
        if (d2 < best.squared_distance ||
            (d2 == best.squared_distance && f < best.face_index)) {
          best.squared_distance = d2;
          best.point = cp;
          best.face_index = f;
          best_region = region;
        }
      }
    } else {
      const double dl = nodes_[node.left].box.squared_distance(query);
      const double dr = nodes_[node.right].box.squared_distance(query);
      // Push the farther child first so the nearer is explored first.
      if (dl <= dr) {
        stack[top++] = node.right;
        stack[top++] = node.left;
      } else {
        stack[top++] = node.left;
        stack[top++] = node.right;
      }
    }
  }
  best.normal = projection_normal(best.face_index, best_region);
  return best;
}

double Bvh::distance(const Vec3& query) const {
  return std::sqrt(closest_point(query).squared_distance);
}

namespace {

// Moller-Trumbore. Returns hit parameter t or nothing.
inline std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir,
                                          const Vec3& a, const Vec3& b,
                                          const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 tvec = origin - a;
  const double u = tvec.dot(pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  return e2.dot(qvec) * inv_det;
}

inline bool ray_box(const Vec3& origin, const Vec3& inv_dir, const Aabb& box,
                    double t_min) {
  double t0 = t_min, t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    double ta = (box.min[i] - origin[i]) * inv_dir[i];
    double tb = (box.max[i] - origin[i]) * inv_dir[i];
    if (ta > tb) std::swap(ta, tb);
    if (std::isnan(ta) || std::isnan(tb)) continue;  // ray parallel, inside slab
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

void Bvh::ray_hits(const Vec3& origin, const Vec3& dir, double t_min,
                   std::vector<double>& ts) const {
  const Vec3 inv_dir = dir.cwiseInverse();
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!ray_box(origin, inv_dir, node.box, t_min)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const auto& tri = mesh_.faces[prim_[i]];
        const auto t = ray_triangle(origin, dir, mesh_.vertices[tri[0]],
                                    mesh_.vertices[tri[1]],
                                    mesh_.vertices[tri[2]]);
        if (t && *t > t_min) ts.push_back(*t);
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
}

int Bvh::count_ray_crossings(const Vec3& origin, const Vec3& dir,
                             double t_min) const {
  std::vector<double> ts;
  ray_hits(origin, dir, t_min, ts);
  return static_cast<int>(ts.size());
}

std::optional<double> Bvh::first_ray_hit(const Vec3& origin, const Vec3& dir,
                                         double t_min) const {
  std::vector<double> ts;
  ray_hits(origin, dir, t_min, ts);
  if (ts.empty()) return std::nullopt;
  return *std::min_element(ts.begin(), ts.end());
}

void Bvh::collect_overlapping(const Aabb& box, std::vector<int>& faces) const {
  int stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const Node& node = nodes_[stack[--top]];
    if (!node.box.overlaps(box)) continue;
    if (node.count > 0) {
      for (int i = node.first; i < node.first + node.count; ++i) {
        const int f = prim_[i];
        const auto& tri = mesh_.faces[f];
        Aabb fb;
        for (int k = 0; k < 3; ++k) fb.expand(mesh_.vertices[tri[k]]);
        if (fb.overlaps(box)) faces.push_back(f);
      }
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
}

}  // namespace kitbash
