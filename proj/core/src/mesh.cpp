#include "kitbash/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace kitbash {

Vec3 TriMesh::face_normal(int f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  Vec3 n = e1.cross(e2);
  const double len = n.norm();
  if (len > 0.0) n /= len;
  return n;
}

double TriMesh::face_area(int f) const {
  const auto& tri = faces[f];
  const Vec3 e1 = vertices[tri[1]] - vertices[tri[0]];
  const Vec3 e2 = vertices[tri[2]] - vertices[tri[0]];
  return 0.5 * e1.cross(e2).norm();
}

double TriMesh::area() const {
  double a = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f)
    a += face_area(static_cast<int>(f));
  return a;
}

TriMesh TriMesh::transformed(const RigidTransform& t) const {
  TriMesh out;
  out.vertices.reserve(vertices.size());
  for (const Vec3& v : vertices) out.vertices.push_back(t.apply(v));
  out.faces = faces;
  return out;
}

void validate_mesh(const TriMesh& mesh) {
  if (mesh.vertices.size() < 3)
    throw InvalidMesh("mesh has fewer than 3 vertices");
  if (mesh.faces.empty()) throw InvalidMesh("mesh has no faces");
  const int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      const int idx = mesh.faces[f][k];
      if (idx < 0 || idx >= nv) {
        std::ostringstream os;
        os << "face " << f << " references vertex " << idx << " out of range";
        throw InvalidMesh(os.str());
      }
    }
  }
  const double diag = aabb(mesh).diagonal();
  if (!(diag > 0.0)) throw InvalidMesh("mesh has zero bounding-box diagonal");
  const double scale2 = 1.0 / (diag * diag);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.face_area(static_cast<int>(f)) * scale2 <= 1e-12) {
      std::ostringstream os;
      os << "face " << f << " is degenerate";
      throw InvalidMesh(os.str());
    }
  }
}

void Aabb::expand(const Vec3& p) {
  min = min.cwiseMin(p);
  max = max.cwiseMax(p);
}

void Aabb::expand(const Aabb& o) {
  min = min.cwiseMin(o.min);
  max = max.cwiseMax(o.max);
}

double Aabb::volume() const {
  const Vec3 e = extent();
  if ((e.array() <= 0.0).any()) return 0.0;
  return e.prod();
}

bool Aabb::overlaps(const Aabb& o) const {
  return (min.array() <= o.max.array()).all() &&
         (o.min.array() <= max.array()).all();
}

double Aabb::squared_distance(const Vec3& p) const {
  double d2 = 0.0;
  for (int i = 0; i < 3; ++i) {
    double d = 0.0;
    if (p[i] < min[i]) d = min[i] - p[i];
    else if (p[i] > max[i]) d = p[i] - max[i];
    d2 += d * d;
  }
  return d2;
}

Aabb aabb(const TriMesh& mesh) {
  if (mesh.vertices.empty()) throw InvalidMesh("aabb of empty mesh");
  Aabb box;
  for (const Vec3& v : mesh.vertices) box.expand(v);
  return box;
}

double bbox_diagonal(const TriMesh& mesh) { return aabb(mesh).diagonal(); }

Vec3 surface_centroid(const TriMesh& mesh) {
  Vec3 acc = Vec3::Zero();
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const double a = mesh.face_area(static_cast<int>(f));
    const Vec3 c = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] +
                    mesh.vertices[tri[2]]) / 3.0;
    acc += a * c;
    total += a;
  }
  if (total <= 0.0) throw InvalidMesh("surface_centroid of zero-area mesh");
  return acc / total;
}

std::pair<double, Vec3> volume_centroid(const TriMesh& mesh) {
  double vol = 0.0;
  Vec3 acc = Vec3::Zero();
  for (const auto& tri : mesh.faces) {
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double v = a.dot(b.cross(c)) / 6.0;  // signed tetra volume vs origin
    vol += v;
    acc += v * (a + b + c) / 4.0;
  }
  if (std::abs(vol) < 1e-12) return {0.0, surface_centroid(mesh)};
  return {vol, acc / vol};
}

bool is_closed(const TriMesh& mesh) {
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& tri : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      int a = tri[k], b = tri[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      ++edge_count[{a, b}];
    }
  }
  for (const auto& [edge, count] : edge_count)
    if (count != 2) return false;
  return true;
}

}  // namespace kitbash
