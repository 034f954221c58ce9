// Joint models, kinematic-tree validation, forward kinematics, and
// articulation-pose sampling.
//
// Frame conventions: part meshes are authored in one shared rest frame, in
// which the assembly is at its rest configuration. A joint's `origin` places
// the joint frame in that rest frame (equivalently, the parent-local frame at
// rest) and its `axis` is expressed in the joint frame; every joint motion is
// conjugated by `origin`. Placements transport joints with their parts: a
// placed part articulates about its placed joint frame.
#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kitbash/lie.hpp"
#include "kitbash/mesh.hpp"

namespace kitbash {

enum class JointKind { Revolute, Prismatic, Cylindrical, Cartesian };

int joint_dof_count(JointKind kind);
const char* joint_kind_name(JointKind kind);

struct JointSpec {
  JointKind kind = JointKind::Revolute;
  RigidTransform origin;
  Vec3 axis = Vec3::UnitZ();  // unused for Cartesian
  std::vector<std::array<double, 2>> limits;  // per DoF [lo, hi]
};

// Throws on wrong limit count, non-finite or inverted limits, non-unit axis.
void validate_joint(const JointSpec& spec);

struct KinematicPart {
  std::string id;
  TriMesh mesh;
  std::optional<JointSpec> joint;            // absent for the root
  std::optional<std::string> parent_id;      // absent for the root
  std::optional<TriMesh> source_parent_mesh; // original parent, for reference offsets
  RigidTransform initial_placement;
};

struct KinematicTree {
  std::map<std::string, KinematicPart> parts;
  std::string root_id;

  const KinematicPart& part(const std::string& id) const;
  // Parts in parent-before-child order, root first.
  std::vector<std::string> topological_order() const;
  // Non-root part ids, sorted.
  std::vector<std::string> non_root_ids() const;
};

// Joint coordinates per part (radians / length units).
using PoseVector = std::map<std::string, std::vector<double>>;

// World placement per non-root part.
using PlacementSet = std::map<std::string, RigidTransform>;

// Relative motion of a joint at the given coordinates, in the frame the
// origin lives in. Throws DofMismatch / LimitViolation.
RigidTransform joint_motion(const JointSpec& spec,
                            std::span<const double> theta);

// World transform per part at a pose, root pinned to root_world. The pose
// must cover every jointed part (MissingJointValue) within limits.
std::map<std::string, RigidTransform> forward_kinematics(
    const KinematicTree& tree, const PoseVector& pose,
    const RigidTransform& root_world = RigidTransform::identity());

// World transforms of the placed assembly at a pose. Each part's joint frame
// rides with its placement; parts absent from `pose` articulate at the rest
// pose, parts absent from `placements` keep identity placement.
std::map<std::string, RigidTransform> assembled_world(
    const KinematicTree& tree, const PlacementSet& placements,
    const PoseVector& pose);

enum class PoseGridMode { OneAtATime, FullProduct };

// Per part, per DoF, `snapshots_per_dof` values uniformly spaced over the
// limit range (both ends inclusive); one coordinate varies at a time with all
// other joints at their lower limits. FullProduct (trees with <= 3 total
// DoFs) enumerates the full grid instead.
std::vector<PoseVector> sample_pose_grid(const KinematicTree& tree,
                                         int snapshots_per_dof,
                                         PoseGridMode mode = PoseGridMode::OneAtATime);

// All joint coordinates at zero, clamped into their limits.
PoseVector rest_pose(const KinematicTree& tree);

struct TreeDiagnostics {
  bool ok = true;
  std::vector<std::string> issues;
};

// Rooted-tree checks: single root matching root_id, no cycles, no dangling
// parents, all parts reachable, joints valid. Returns diagnostics instead of
// throwing.
TreeDiagnostics validate_tree(const KinematicTree& tree);

}  // namespace kitbash
