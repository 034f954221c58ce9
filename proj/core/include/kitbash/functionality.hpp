// Black-box task objectives on an assembled scene: reachability via damped
// least-squares IK, packing into a box with collision checks, trajectory
// tracking, and weighted combination.
#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "kitbash/kinematics.hpp"
#include "kitbash/sampling.hpp"

namespace kitbash {

struct AssembledScene {
  const KinematicTree* tree = nullptr;
  PlacementSet placements;
  std::vector<PoseVector> pose_set;  // evaluated poses; empty means rest only

  std::vector<PoseVector> poses_or_rest() const;
};

// Scalar task energy; >= 0, lower is better, deterministic, no gradients.
using Objective = std::function<double(const AssembledScene&)>;

struct AngularTarget {
  Vec3 axis = Vec3::UnitZ();        // desired direction, world frame
  Vec3 local_axis = Vec3::UnitZ();  // beam direction in the part frame
  double max_deviation_deg = 180.0; // deviation inside the cone is free
};

struct ReachTarget {
  std::string part_id;
  Vec3 effector_point = Vec3::Zero();  // part-local
  Vec3 target = Vec3::Zero();          // world
  std::optional<AngularTarget> angular_target;
};

struct IkOptions {
  double damping = 1e-2;
  double step_clamp = 0.2;  // per-coordinate, radians or length
  int max_iters = 200;
};

struct IkResult {
  PoseVector pose;      // full pose: solved chain joints, rest elsewhere
  double residual = 0;  // sqrt(position^2 + angular excess^2)
  std::vector<double> residual_trace;  // best-so-far per iteration
};

// Damped least-squares IK over the joint coordinates on the chain from the
// root to target.part_id, limits enforced by clamping. Throws NoDofOnChain.
IkResult ik_solve(const KinematicTree& tree, const PlacementSet& placements,
                  const ReachTarget& target, const IkOptions& options = {});

struct CollisionParams {
  int surface_samples = 512;
  std::uint64_t seed = 0xc0111de;
  // Penetration below this depth is ignored (parent-child contact allowance).
  double contact_tolerance = 0.0;
};

// Sum over mesh pairs of an approximate penetration depth: pairs are gated by
// a triangle-triangle intersection test (plus a containment check). Depth is
// a sampled minimal-separating-translation estimate: over candidate exit
// directions (inward normals of contained surface samples), the largest exit
// chord required to free every contained sample, minimized over directions.
// Zero iff no pair intersects.
double collision_penetration(const std::vector<TriMesh>& meshes_world,
                             const CollisionParams& params = {});

// Penetration depth for one pair given world placements; geometry is cached
// in rest frames so no per-pose rebuilds happen.
class CollisionBody {
 public:
  explicit CollisionBody(const TriMesh& rest_mesh,
                         const CollisionParams& params = {});
  const Bvh& bvh() const { return *bvh_; }
  const Aabb& rest_bounds() const { return bvh_->bounds(); }

  friend double pair_penetration(const CollisionBody& a,
                                 const RigidTransform& ta,
                                 const CollisionBody& b,
                                 const RigidTransform& tb,
                                 double contact_tolerance);

 private:
  std::shared_ptr<Bvh> bvh_;
  std::vector<Vec3> sample_points_;    // rest frame
  std::vector<Vec3> sample_inward_;    // inward unit normals, rest frame
};

double pair_penetration(const CollisionBody& a, const RigidTransform& ta,
                        const CollisionBody& b, const RigidTransform& tb,
                        double contact_tolerance = 0.0);

// True when any triangle of A intersects any triangle of B (coplanar overlap
// included); transforms map each mesh into the shared frame.
bool meshes_intersect(const Bvh& a, const RigidTransform& ta, const Bvh& b,
                      const RigidTransform& tb);

struct PackSpec {
  Vec3 box_center = Vec3::Zero();
  double box_half_extent = 0.5;
};

// Sum of squared componentwise box excess of every part AABB at every pose,
// plus collision penetration over part pairs at every pose. Parent-child
// pairs get a contact allowance of 0.5% scene diagonal; other pairs do not.
Objective pack_objective(const PackSpec& spec,
                         const CollisionParams& params = {});

// Sum over targets of squared ik_solve residual.
Objective reach_objective(const std::vector<ReachTarget>& targets,
                          const IkOptions& options = {});

// Collision penetration alone (same pair policy as pack_objective).
Objective collision_objective(const CollisionParams& params = {});

struct Trajectory {
  std::string part_id;
  Vec3 effector_point = Vec3::Zero();
  std::vector<std::pair<double, Vec3>> waypoints;  // (time in [0,1], world)
};

// Mean squared IK residual over the waypoints.
Objective trajectory_objective(const Trajectory& trajectory,
                               const IkOptions& options = {});

Objective combine_objectives(
    const std::vector<std::pair<Objective, double>>& weighted_terms);

}  // namespace kitbash
