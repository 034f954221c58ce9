#include "kitbash/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

namespace kitbash {

namespace {

std::vector<std::pair<std::string, TriMesh>> placed_meshes(
    const AssembledScene& scene) {
  const auto world =
      assembled_world(*scene.tree, scene.placements, rest_pose(*scene.tree));
  std::vector<std::pair<std::string, TriMesh>> out;
  for (const auto& [id, part] : scene.tree->parts)
    out.emplace_back(id, part.mesh.transformed(world.at(id)));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

bool rooted(const AssembledScene& scene, double tol) {
  const auto meshes = placed_meshes(scene);
  const int n = static_cast<int>(meshes.size());
  if (n <= 1) return true;
  UnionFind uf(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (uf.find(i) == uf.find(j)) continue;
      if (min_surface_gap(meshes[i].second, meshes[j].second) < tol)
        uf.unite(i, j);
    }
  }
  const int root = uf.find(0);
  for (int i = 1; i < n; ++i)
    if (uf.find(i) != root) return false;
  return true;
}

namespace {

// 2-D convex hull (monotone chain); returns CCW without repeated last point.
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const int n = static_cast<int>(pts.size());
  if (n < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) -
           (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  int k = 0;
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  const int lower = k + 1;
  for (int i = n - 2; i >= 0; --i) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool point_in_hull(const Eigen::Vector2d& p,
                   const std::vector<Eigen::Vector2d>& hull) {
  if (hull.size() < 3) return false;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d& a = hull[i];
    const Eigen::Vector2d& b = hull[(i + 1) % hull.size()];
    const double cross =
        (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (cross < 0) return false;  // hull is CCW
  }
  return true;
}

}  // namespace

bool stable(const AssembledScene& scene, const Vec3& gravity_dir) {
  const Vec3 g = gravity_dir.normalized();
  const auto meshes = placed_meshes(scene);

  Aabb scene_box;
  for (const auto& [id, mesh] : meshes) scene_box.expand(aabb(mesh));
  const double diag = scene_box.diagonal();

  // Height along gravity: h = dot(p, g); ground is at max h.
  double ground = -std::numeric_limits<double>::infinity();
  for (const auto& [id, mesh] : meshes)
    for (const Vec3& v : mesh.vertices) ground = std::max(ground, v.dot(g));

  // Basis of the plane orthogonal to gravity.
  const Vec3 u0 =
      (std::abs(g.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY()).cross(g).normalized();
  const Vec3 u1 = g.cross(u0).normalized();

  std::vector<Eigen::Vector2d> contacts;
  for (const auto& [id, mesh] : meshes) {
    const auto samples = sample_surface(mesh, 512, 0x57ab1e);
    for (const auto& s : samples) {
      if (ground - s.position.dot(g) < 0.01 * diag)
        contacts.push_back({s.position.dot(u0), s.position.dot(u1)});
    }
    for (const Vec3& v : mesh.vertices) {
      if (ground - v.dot(g) < 0.01 * diag)
        contacts.push_back({v.dot(u0), v.dot(u1)});
    }
  }
  auto hull = convex_hull(contacts);
  if (hull.size() < 3)
    throw NoGroundContact("support polygon is degenerate");

  // Shrink the hull toward its centroid by 2%.
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : hull) centroid += p;
  centroid /= static_cast<double>(hull.size());
  for (auto& p : hull) p = centroid + 0.98 * (p - centroid);

  // Volume-weighted center of mass over parts.
  double total_vol = 0.0;
  Vec3 com = Vec3::Zero();
  for (const auto& [id, mesh] : meshes) {
    const auto [vol, c] = volume_centroid(mesh);
    const double w = std::abs(vol);
    com += w * c;
    total_vol += w;
  }
  if (total_vol <= 0.0) {
    // Open geometry: fall back to area-weighted surface centroids.
    double total_area = 0.0;
    com = Vec3::Zero();
    for (const auto& [id, mesh] : meshes) {
      const double a = mesh.area();
      com += a * surface_centroid(mesh);
      total_area += a;
    }
    com /= total_area;
  } else {
    com /= total_vol;
  }

  return point_in_hull({com.dot(u0), com.dot(u1)}, hull);
}

// ---------------------------------------------------------------------------
// Voxel overlap
// ---------------------------------------------------------------------------

namespace {

struct VoxelGrid {
  Aabb bounds;
  int res = 64;
  std::vector<std::uint8_t> occupied;  // res^3

  int index(int x, int y, int z) const { return (z * res + y) * res + x; }
  int count() const {
    int c = 0;
    for (auto v : occupied) c += v;
    return c;
  }
};

VoxelGrid voxelize(const TriMesh& mesh, const Aabb& bounds, int res) {
  VoxelGrid grid;
  grid.bounds = bounds;
  grid.res = res;
  grid.occupied.assign(static_cast<std::size_t>(res) * res * res, 0);
  const Vec3 cell = bounds.extent() / res;

  if (is_closed(mesh)) {
    // Parity fill: one ray per z-column, crossings sorted, odd intervals
    // filled. Column centers get an irrational nudge to dodge edge-on hits.
    const Bvh bvh(mesh);
    const Aabb mesh_box = aabb(mesh);
    for (int y = 0; y < res; ++y) {
      for (int x = 0; x < res; ++x) {
        const double cx =
            bounds.min.x() + (x + 0.5 + 1.23456789e-6) * cell.x();
        const double cy =
            bounds.min.y() + (y + 0.5 + 2.13456789e-6) * cell.y();
        if (cx < mesh_box.min.x() || cx > mesh_box.max.x() ||
            cy < mesh_box.min.y() || cy > mesh_box.max.y())
          continue;
        const Vec3 origin(cx, cy, bounds.min.z() - 1.0);
        std::vector<double> ts;
        bvh.ray_hits(origin, Vec3::UnitZ(), 0.0, ts);
        std::sort(ts.begin(), ts.end());
        for (std::size_t k = 0; k + 1 < ts.size(); k += 2) {
          const double z0 = origin.z() + ts[k];
          const double z1 = origin.z() + ts[k + 1];
          for (int z = 0; z < res; ++z) {
            const double cz = bounds.min.z() + (z + 0.5) * cell.z();
            if (cz >= z0 && cz <= z1) grid.occupied[grid.index(x, y, z)] = 1;
          }
        }
      }
    }
    return grid;
  }

  std::cerr << "[metrics] open mesh: voxelizing as a surface shell\n";
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& tri = mesh.faces[f];
    Aabb tb;
    for (int k = 0; k < 3; ++k) tb.expand(mesh.vertices[tri[k]]);
    const auto clamp_cell = [&](double v, double lo, double c) {
      return static_cast<int>(std::floor((v - lo) / c));
    };
    const int x0 = std::max(0, clamp_cell(tb.min.x(), bounds.min.x(), cell.x()));
    const int x1 = std::min(res - 1, clamp_cell(tb.max.x(), bounds.min.x(), cell.x()));
    const int y0 = std::max(0, clamp_cell(tb.min.y(), bounds.min.y(), cell.y()));
    const int y1 = std::min(res - 1, clamp_cell(tb.max.y(), bounds.min.y(), cell.y()));
    const int z0 = std::max(0, clamp_cell(tb.min.z(), bounds.min.z(), cell.z()));
    const int z1 = std::min(res - 1, clamp_cell(tb.max.z(), bounds.min.z(), cell.z()));
    for (int z = z0; z <= z1; ++z)
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) grid.occupied[grid.index(x, y, z)] = 1;
  }
  return grid;
}

}  // namespace

double aor(const AssembledScene& scene, int voxel_res,
           std::vector<PairOverlap>* pair_table) {
  if (voxel_res < 16) throw ValidationError("aor: voxel_res must be >= 16");
  const auto meshes = placed_meshes(scene);

  // Sibling pairs: same parent.
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < meshes.size(); ++i) {
    for (std::size_t j = i + 1; j < meshes.size(); ++j) {
      const auto& pa = scene.tree->part(meshes[i].first).parent_id;
      const auto& pb = scene.tree->part(meshes[j].first).parent_id;
      if (pa && pb && *pa == *pb)
        pairs.emplace_back(meshes[i].first, meshes[j].first);
    }
  }
  if (pair_table) pair_table->clear();
  if (pairs.empty()) return 0.0;

  Aabb bounds;
  for (const auto& [id, mesh] : meshes) bounds.expand(aabb(mesh));
  // Pad slightly so boundary voxels are not clipped.
  const Vec3 pad = 0.01 * bounds.extent();
  bounds.min -= pad;
  bounds.max += pad;

  std::map<std::string, VoxelGrid> grids;
  for (const auto& [id, mesh] : meshes) {
    bool needed = false;
    for (const auto& [a, b] : pairs)
      if (a == id || b == id) needed = true;
    if (needed) grids.emplace(id, voxelize(mesh, bounds, voxel_res));
  }

  const double cell_volume =
      (bounds.extent() / voxel_res).prod();
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    const VoxelGrid& ga = grids.at(a);
    const VoxelGrid& gb = grids.at(b);
    int inter = 0;
    for (std::size_t k = 0; k < ga.occupied.size(); ++k)
      inter += (ga.occupied[k] & gb.occupied[k]);
    const int va = ga.count(), vb = gb.count();
    const double ratio =
        (va == 0 || vb == 0) ? 0.0
                             : static_cast<double>(inter) / std::min(va, vb);
    sum += ratio;
    if (pair_table)
      pair_table->push_back({a, b, ratio, inter * cell_volume});
  }
  return sum / pairs.size();
}

MetricsReport compute_metrics(const AssembledScene& scene, double contact_tol,
                              const Vec3& gravity_dir, int voxel_res) {
  MetricsReport report;
  report.rooted = rooted(scene, contact_tol);
  try {
    report.stable = stable(scene, gravity_dir);
  } catch (const NoGroundContact&) {
    report.stable = false;
  }
  report.aor = aor(scene, voxel_res, &report.sibling_overlaps);
  return report;
}

// ---------------------------------------------------------------------------
// COV / MMD
// ---------------------------------------------------------------------------

ReferenceSet make_reference_set(const std::vector<TriMesh>& shapes,
                                int samples_per_shape, std::uint64_t seed) {
  ReferenceSet set;
  for (const TriMesh& mesh : shapes) {
    const auto samples = sample_surface(mesh, samples_per_shape, seed);
    std::vector<Vec3> cloud;
    cloud.reserve(samples.size());
    for (const auto& s : samples) cloud.push_back(s.position);
    set.clouds.push_back(std::move(cloud));
  }
  return set;
}

double chamfer_distance(const std::vector<Vec3>& a,
                        const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw EmptyInput("chamfer of empty cloud");
  auto directed = [](const std::vector<Vec3>& from,
                     const std::vector<Vec3>& to) {
    double acc = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
      acc += std::sqrt(best);
    }
    return acc / from.size();
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

std::pair<double, double> cov_mmd(const ReferenceSet& generated,
                                  const ReferenceSet& reference) {
  if (generated.clouds.empty() || reference.clouds.empty())
    throw EmptyInput("cov_mmd: empty shape set");
  const int ng = static_cast<int>(generated.clouds.size());
  const int nr = static_cast<int>(reference.clouds.size());
  Eigen::MatrixXd dist(ng, nr);
  for (int i = 0; i < ng; ++i)
    for (int j = 0; j < nr; ++j)
      dist(i, j) = chamfer_distance(generated.clouds[i], reference.clouds[j]);

  std::vector<bool> covered(nr, false);
  for (int i = 0; i < ng; ++i) {
    int arg = 0;
    for (int j = 1; j < nr; ++j)
      if (dist(i, j) < dist(i, arg)) arg = j;
    covered[arg] = true;
  }
  int covered_count = 0;
  for (bool c : covered) covered_count += c;

  double mmd = 0.0;
  for (int j = 0; j < nr; ++j) {
    double best = dist(0, j);
    for (int i = 1; i < ng; ++i) best = std::min(best, dist(i, j));
    mmd += best;
  }
  return {static_cast<double>(covered_count) / nr, mmd / nr};
}

}  // namespace kitbash
