#include "kitbash/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace kitbash {

int joint_dof_count(JointKind kind) {
  switch (kind) {
    case JointKind::Revolute:
    case JointKind::Prismatic:
      return 1;
    case JointKind::Cylindrical:
      return 2;
    case JointKind::Cartesian:
      return 3;
  }
  return 0;
}

const char* joint_kind_name(JointKind kind) {
  switch (kind) {
    case JointKind::Revolute: return "revolute";
    case JointKind::Prismatic: return "prismatic";
    case JointKind::Cylindrical: return "cylindrical";
    case JointKind::Cartesian: return "cartesian";
  }
  return "?";
}

void validate_joint(const JointSpec& spec) {
  const int dof = joint_dof_count(spec.kind);
  if (static_cast<int>(spec.limits.size()) != dof) {
    std::ostringstream os;
    os << joint_kind_name(spec.kind) << " joint needs " << dof
       << " limit pairs, got " << spec.limits.size();
    throw DofMismatch(os.str());
  }
  for (const auto& [lo, hi] : spec.limits) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      std::ostringstream os;
      os << "joint limits must be finite with lo <= hi, got [" << lo << ", "
         << hi << "]";
      throw LimitViolation(os.str());
    }
  }
  if (spec.kind != JointKind::Cartesian &&
      std::abs(spec.axis.norm() - 1.0) > 1e-9)
    throw ValidationError("joint axis must be unit length");
}

const KinematicPart& KinematicTree::part(const std::string& id) const {
  const auto it = parts.find(id);
  if (it == parts.end()) throw ValidationError("unknown part id: " + id);
  return it->second;
}

std::vector<std::string> KinematicTree::topological_order() const {
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& [id, part] : parts)
    if (part.parent_id) children[*part.parent_id].push_back(id);
  for (auto& [id, kids] : children) std::sort(kids.begin(), kids.end());

  std::vector<std::string> order;
  std::deque<std::string> queue{root_id};
  while (!queue.empty()) {
    const std::string id = queue.front();
    queue.pop_front();
    order.push_back(id);
    for (const auto& kid : children[id]) queue.push_back(kid);
  }
  if (order.size() != parts.size())
    throw ValidationError("tree is not fully reachable from the root");
  return order;
}

std::vector<std::string> KinematicTree::non_root_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, part] : parts)
    if (id != root_id) ids.push_back(id);
  return ids;
}

namespace {

std::span<const double> pose_values(const PoseVector& pose,
                                    const std::string& id) {
  const auto it = pose.find(id);
  if (it == pose.end())
    throw MissingJointValue("pose has no joint values for part " + id);
  return it->second;
}

void check_limits(const JointSpec& spec, std::span<const double> theta,
                  const std::string& id) {
  if (static_cast<int>(theta.size()) != joint_dof_count(spec.kind)) {
    std::ostringstream os;
    os << "part " << id << ": expected " << joint_dof_count(spec.kind)
       << " joint values, got " << theta.size();
    throw DofMismatch(os.str());
  }
  for (std::size_t d = 0; d < theta.size(); ++d) {
    if (theta[d] < spec.limits[d][0] - 1e-12 ||
        theta[d] > spec.limits[d][1] + 1e-12) {
      std::ostringstream os;
      os << "part " << id << ": joint value " << theta[d]
         << " outside limits [" << spec.limits[d][0] << ", "
         << spec.limits[d][1] << "]";
      throw LimitViolation(os.str());
    }
  }
}

}  // namespace

RigidTransform joint_motion(const JointSpec& spec,
                            std::span<const double> theta) {
  check_limits(spec, theta, "<joint>");
  RigidTransform local;
  switch (spec.kind) {
    case JointKind::Revolute:
      local.rotation = so3_exp(theta[0] * spec.axis);
      break;
    case JointKind::Prismatic:
      local.translation = theta[0] * spec.axis;
      break;
    case JointKind::Cylindrical:
      local.rotation = so3_exp(theta[0] * spec.axis);
      local.translation = theta[1] * spec.axis;
      break;
    case JointKind::Cartesian:
      local.translation = Vec3(theta[0], theta[1], theta[2]);
      break;
  }
  return spec.origin * local * spec.origin.inverse();
}

std::map<std::string, RigidTransform> forward_kinematics(
    const KinematicTree& tree, const PoseVector& pose,
    const RigidTransform& root_world) {
  std::map<std::string, RigidTransform> world;
  for (const std::string& id : tree.topological_order()) {
    const KinematicPart& part = tree.part(id);
    if (!part.parent_id) {
      world[id] = root_world;
      continue;
    }
    const auto theta = pose_values(pose, id);
    check_limits(*part.joint, theta, id);
    world[id] = world.at(*part.parent_id) * joint_motion(*part.joint, theta);
  }
  return world;
}

std::map<std::string, RigidTransform> assembled_world(
    const KinematicTree& tree, const PlacementSet& placements,
    const PoseVector& pose) {
  const PoseVector rest = rest_pose(tree);
  std::map<std::string, RigidTransform> world;
  std::map<std::string, RigidTransform> drift;  // world * placement^-1
  for (const std::string& id : tree.topological_order()) {
    const KinematicPart& part = tree.part(id);
    if (!part.parent_id) {
      world[id] = RigidTransform::identity();
      drift[id] = RigidTransform::identity();
      continue;
    }
    const auto pit = placements.find(id);
    const RigidTransform placement =
        pit != placements.end() ? pit->second : RigidTransform::identity();
    const auto th_it = pose.find(id);
    const std::vector<double>& theta =
        th_it != pose.end() ? th_it->second : rest.at(id);
    check_limits(*part.joint, theta, id);
    // The joint frame rides with the placed part; the parent's drift from
    // its own placed rest pose transports the child.
    world[id] = drift.at(*part.parent_id) * placement *
                joint_motion(*part.joint, theta);
    drift[id] = world[id] * placement.inverse();
  }
  return world;
}

std::vector<PoseVector> sample_pose_grid(const KinematicTree& tree,
                                         int snapshots_per_dof,
                                         PoseGridMode mode) {
  if (snapshots_per_dof < 2)
    throw ValidationError("sample_pose_grid: snapshots_per_dof must be >= 2");

  const auto order = tree.topological_order();
  PoseVector lower;
  int total_dofs = 0;
  for (const std::string& id : order) {
    const KinematicPart& part = tree.part(id);
    if (!part.joint) continue;
    std::vector<double> lo;
    for (const auto& lim : part.joint->limits) lo.push_back(lim[0]);
    total_dofs += static_cast<int>(lo.size());
    lower[id] = std::move(lo);
  }

  auto dof_values = [&](const JointSpec& joint, int d) {
    std::vector<double> vals(snapshots_per_dof);
    const double lo = joint.limits[d][0], hi = joint.limits[d][1];
    for (int i = 0; i < snapshots_per_dof; ++i)
      vals[i] = lo + (hi - lo) * i / (snapshots_per_dof - 1);
    return vals;
  };

  std::vector<PoseVector> poses;
  if (mode == PoseGridMode::OneAtATime) {
    for (const std::string& id : order) {
      const KinematicPart& part = tree.part(id);
      if (!part.joint) continue;
      for (int d = 0; d < joint_dof_count(part.joint->kind); ++d) {
        for (double v : dof_values(*part.joint, d)) {
          PoseVector pose = lower;
          pose[id][d] = v;
          poses.push_back(std::move(pose));
        }
      }
    }
    return poses;
  }

  if (total_dofs > 3)
    throw ValidationError(
        "full-product pose grid is limited to trees with <= 3 total DoFs");
  std::vector<std::pair<std::string, int>> dims;  // (part, dof)
  for (const std::string& id : order) {
    const KinematicPart& part = tree.part(id);
    if (!part.joint) continue;
    for (int d = 0; d < joint_dof_count(part.joint->kind); ++d)
      dims.emplace_back(id, d);
  }
  poses.push_back(lower);
  for (const auto& [id, d] : dims) {
    std::vector<PoseVector> next;
    for (const PoseVector& base : poses) {
      for (double v : dof_values(*tree.part(id).joint, d)) {
        PoseVector pose = base;
        pose[id][d] = v;
        next.push_back(std::move(pose));
      }
    }
    poses = std::move(next);
  }
  return poses;
}

PoseVector rest_pose(const KinematicTree& tree) {
  PoseVector pose;
  for (const auto& [id, part] : tree.parts) {
    if (!part.joint) continue;
    std::vector<double> theta;
    for (const auto& lim : part.joint->limits)
      theta.push_back(std::clamp(0.0, lim[0], lim[1]));
    pose[id] = std::move(theta);
  }
  return pose;
}

TreeDiagnostics validate_tree(const KinematicTree& tree) {
  TreeDiagnostics diag;
  auto issue = [&](const std::string& msg) {
    diag.ok = false;
    diag.issues.push_back(msg);
  };

  if (tree.parts.empty()) {
    issue("tree has no parts");
    return diag;
  }

  std::vector<std::string> roots;
  for (const auto& [id, part] : tree.parts) {
    if (part.id != id) issue("part map key '" + id + "' does not match part id '" + part.id + "'");
    if (!part.parent_id) {
      roots.push_back(id);
      if (part.joint) issue("root part '" + id + "' must not carry a joint");
      continue;
    }
    if (!tree.parts.count(*part.parent_id))
      issue("part '" + id + "' has dangling parent '" + *part.parent_id + "'");
    if (!part.joint) {
      issue("non-root part '" + id + "' has no joint");
    } else {
      try {
        validate_joint(*part.joint);
      } catch (const Error& e) {
        issue("part '" + id + "': " + e.what());
      }
    }
  }
  if (roots.empty()) issue("no root part (every part has a parent)");
  if (roots.size() > 1) {
    std::string msg = "multiple roots:";
    for (const auto& r : roots) msg += " '" + r + "'";
    issue(msg);
  }
  if (!roots.empty() && !tree.parts.count(tree.root_id))
    issue("root_id '" + tree.root_id + "' is not a part");
  else if (roots.size() == 1 && roots[0] != tree.root_id)
    issue("root_id '" + tree.root_id + "' does not match the parentless part '" +
          roots[0] + "'");

  // Cycle detection by walking parents from every node.
  for (const auto& [id, part] : tree.parts) {
    std::set<std::string> seen{id};
    const KinematicPart* cur = &part;
    while (cur->parent_id) {
      const auto it = tree.parts.find(*cur->parent_id);
      if (it == tree.parts.end()) break;
      if (!seen.insert(it->first).second) {
        std::string msg = "cycle through parts:";
        for (const auto& s : seen) msg += " '" + s + "'";
        issue(msg);
        break;
      }
      cur = &it->second;
    }
  }
  return diag;
}

}  // namespace kitbash
