// Assembly-quality metrics: connectivity, quasi-static stability, sibling
// volume overlap, and set-level coverage / minimum matching distance.
#pragma once

#include "kitbash/functionality.hpp"

namespace kitbash {

struct PairOverlap {
  std::string part_a;
  std::string part_b;
  double ratio = 0.0;               // |A ∩ B| / min(|A|, |B|)
  double intersection_volume = 0.0; // raw, in scene units^3
};

struct MetricsReport {
  bool rooted = false;
  bool stable = false;
  double aor = 0.0;
  std::vector<PairOverlap> sibling_overlaps;
};

// True when the parts form one connected component under surface contact:
// an edge when the minimum surface gap between two placed parts is below
// `tol` (absolute length; callers usually pass 1% of the scene diagonal).
bool rooted(const AssembledScene& scene, double tol);

// Quasi-static support test: the volume-weighted center of mass must project
// (along gravity) inside the convex hull of the ground-contact points,
// shrunk by a 2% margin. Throws NoGroundContact when no usable support
// polygon exists.
bool stable(const AssembledScene& scene, const Vec3& gravity_dir);

// Mean voxel-overlap ratio over sibling pairs (parts sharing a parent) on a
// shared voxel_res^3 grid over the scene bounds; 0 when no sibling pair
// exists. Open meshes rasterize as a one-voxel surface shell (with a warning
// to stderr) instead of a solid fill.
double aor(const AssembledScene& scene, int voxel_res = 64,
           std::vector<PairOverlap>* pair_table = nullptr);

MetricsReport compute_metrics(const AssembledScene& scene, double contact_tol,
                              const Vec3& gravity_dir, int voxel_res = 64);

// Point clouds with a uniform sample count per shape.
struct ReferenceSet {
  std::vector<std::vector<Vec3>> clouds;
};

ReferenceSet make_reference_set(const std::vector<TriMesh>& shapes,
                                int samples_per_shape = 256,
                                std::uint64_t seed = 0xc70bd);

// COV: fraction of reference shapes that are the chamfer-nearest reference of
// at least one generated shape. MMD: mean over reference shapes of the
// minimum chamfer distance to any generated shape.
std::pair<double, double> cov_mmd(const ReferenceSet& generated,
                                  const ReferenceSet& reference);

// Symmetric point-cloud chamfer distance (mean nearest-neighbor, averaged
// over both directions).
double chamfer_distance(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

}  // namespace kitbash
