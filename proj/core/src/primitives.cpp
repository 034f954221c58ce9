#include "kitbash/primitives.hpp"
#include <map>
#include <array>

#include <cmath>

namespace kitbash {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TriMesh make_box(const Vec3& center, const Vec3& extents) {
  const Vec3 h = 0.5 * extents;
  TriMesh m;
  m.vertices.reserve(8);
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back(center + Vec3((i & 1) ? h.x() : -h.x(),
                                       (i & 2) ? h.y() : -h.y(),
                                       (i & 4) ? h.z() : -h.z()));
  }
  // 6 faces, outward winding
  const int quads[6][4] = {
      {0, 4, 6, 2},  // -x
      {1, 3, 7, 5},  // +x
      {0, 1, 5, 4},  // -y
      {2, 6, 7, 3},  // +y
      {0, 2, 3, 1},  // -z
      {4, 5, 7, 6},  // +z
  };
  for (const auto& q : quads) {
    m.faces.push_back({q[0], q[1], q[2]});
    m.faces.push_back({q[0], q[2], q[3]});
  }
  return m;
}

TriMesh make_box_grid(const Vec3& center, const Vec3& extents,
                      const Eigen::Vector3i& divisions) {
  const Vec3 lo = center - 0.5 * extents;
  const Eigen::Vector3i n = divisions.cwiseMax(1);
  TriMesh m;
  std::map<std::array<int, 3>, int> node_index;
  auto node = [&](int i, int j, int k) {
    const std::array<int, 3> key{i, j, k};
    const auto it = node_index.find(key);
    if (it != node_index.end()) return it->second;
    const int idx = static_cast<int>(m.vertices.size());
    m.vertices.push_back(lo + Vec3(extents.x() * i / n.x(),
                                   extents.y() * j / n.y(),
                                   extents.z() * k / n.z()));
    node_index[key] = idx;
    return idx;
  };
  // One face per axis and side; lattice coordinates on the two free axes.
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      const int fixed = side ? n[axis] : 0;
      auto grid_node = [&](int iu, int iv) {
        std::array<int, 3> c{};
        c[axis] = fixed;
        c[u] = iu;
        c[v] = iv;
        return node(c[0], c[1], c[2]);
      };
      for (int iu = 0; iu < n[u]; ++iu) {
        for (int iv = 0; iv < n[v]; ++iv) {
          const int a = grid_node(iu, iv);
          const int b = grid_node(iu + 1, iv);
          const int c = grid_node(iu + 1, iv + 1);
          const int d = grid_node(iu, iv + 1);
          if (side) {  // outward normal along +axis: u cross v order
            m.faces.push_back({a, b, c});
            m.faces.push_back({a, c, d});
          } else {
            m.faces.push_back({a, c, b});
            m.faces.push_back({a, d, c});
          }
        }
      }
    }
  }
  return m;
}

TriMesh make_uv_sphere(const Vec3& center, double radius, int segments,
                       int rings) {
  TriMesh m;
  m.vertices.push_back(center + Vec3(0, 0, radius));   // north pole: 0
  for (int r = 1; r < rings; ++r) {
    const double phi = kPi * r / rings;
    for (int s = 0; s < segments; ++s) {
      const double theta = 2.0 * kPi * s / segments;
      m.vertices.push_back(center +
                           radius * Vec3(std::sin(phi) * std::cos(theta),
                                         std::sin(phi) * std::sin(theta),
                                         std::cos(phi)));
    }
  }
  m.vertices.push_back(center + Vec3(0, 0, -radius));  // south pole
  const int south = static_cast<int>(m.vertices.size()) - 1;
  auto ring_vertex = [&](int r, int s) {
    return 1 + (r - 1) * segments + (s % segments);
  };
  for (int s = 0; s < segments; ++s)
    m.faces.push_back({0, ring_vertex(1, s), ring_vertex(1, s + 1)});
  for (int r = 1; r < rings - 1; ++r) {
    for (int s = 0; s < segments; ++s) {
      const int a = ring_vertex(r, s), b = ring_vertex(r, s + 1);
      const int c = ring_vertex(r + 1, s), d = ring_vertex(r + 1, s + 1);
      m.faces.push_back({a, c, d});
      m.faces.push_back({a, d, b});
    }
  }
  for (int s = 0; s < segments; ++s)
    m.faces.push_back({south, ring_vertex(rings - 1, s + 1),
                       ring_vertex(rings - 1, s)});
  return m;
}

TriMesh make_cylinder(const Vec3& base_center, double radius, double height,
                      int segments) {
  TriMesh m;
  for (int s = 0; s < segments; ++s) {
    const double a = 2.0 * kPi * s / segments;
    const Vec3 rim(radius * std::cos(a), radius * std::sin(a), 0.0);
    m.vertices.push_back(base_center + rim);                       // bottom ring
    m.vertices.push_back(base_center + rim + Vec3(0, 0, height));  // top ring
  }
  const int bc = static_cast<int>(m.vertices.size());
  m.vertices.push_back(base_center);                       // bottom center
  m.vertices.push_back(base_center + Vec3(0, 0, height));  // top center
  for (int s = 0; s < segments; ++s) {
    const int b0 = 2 * s, t0 = 2 * s + 1;
    const int b1 = 2 * ((s + 1) % segments), t1 = 2 * ((s + 1) % segments) + 1;
    m.faces.push_back({b0, b1, t1});
    m.faces.push_back({b0, t1, t0});
    m.faces.push_back({bc, b1, b0});      // bottom cap (normal -z)
    m.faces.push_back({bc + 1, t0, t1});  // top cap (normal +z)
  }
  return m;
}

TriMesh make_plane(double sx, double sy, int nx, int ny) {
  TriMesh m;
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      m.vertices.push_back(Vec3(-0.5 * sx + sx * i / nx,
                                -0.5 * sy + sy * j / ny, 0.0));
    }
  }
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      m.faces.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      m.faces.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  return m;
}

TriMesh merge_meshes(const std::vector<TriMesh>& meshes) {
  TriMesh out;
  for (const TriMesh& m : meshes) {
    const int base = static_cast<int>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), m.vertices.begin(),
                        m.vertices.end());
    for (const auto& f : m.faces)
      out.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
  }
  return out;
}

}  // namespace kitbash
