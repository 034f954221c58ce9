#include "kitbash/functionality.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace kitbash {

std::vector<PoseVector> AssembledScene::poses_or_rest() const {
  if (!pose_set.empty()) return pose_set;
  return {rest_pose(*tree)};
}

// ---------------------------------------------------------------------------
// Inverse kinematics
// ---------------------------------------------------------------------------

namespace {

struct ChainJoint {
  std::string part_id;
  int dof_offset = 0;
};

// Parts with joints on the path root -> part_id, root side first.
std::vector<std::string> chain_to(const KinematicTree& tree,
                                  const std::string& part_id) {
  std::vector<std::string> chain;
  const KinematicPart* cur = &tree.part(part_id);
  while (cur->parent_id) {
    chain.push_back(cur->id);
    cur = &tree.part(*cur->parent_id);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

struct EffectorState {
  Vec3 position = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  // Per chain DoF: world axis and a point on it (revolute), or the world
  // slide direction (prismatic).
  std::vector<Vec3> axis;
  std::vector<Vec3> point;
  std::vector<bool> rotational;
};

EffectorState effector_state(const KinematicTree& tree,
                             const PlacementSet& placements,
                             const PoseVector& pose,
                             const ReachTarget& target) {
  const auto world = assembled_world(tree, placements, pose);
  auto placement_of = [&](const std::string& id) {
    const auto it = placements.find(id);
    return it != placements.end() ? it->second : RigidTransform::identity();
  };

  EffectorState state;
  const RigidTransform& w_part = world.at(target.part_id);
  state.position = w_part.apply(target.effector_point);
  if (target.angular_target)
    state.direction = w_part.rotation * target.angular_target->local_axis;

  for (const std::string& id : chain_to(tree, target.part_id)) {
    const KinematicPart& part = tree.part(id);
    const JointSpec& joint = *part.joint;
    // Joint frame rides with the placed part: parent drift composed with the
    // part placement and the authored origin.
    const RigidTransform drift_parent =
        world.at(*part.parent_id) * placement_of(*part.parent_id).inverse();
    const RigidTransform joint_world =
        drift_parent * placement_of(id) * joint.origin;
    const Vec3 axis_world = joint_world.rotation * joint.axis;
    switch (joint.kind) {
      case JointKind::Revolute:
        state.axis.push_back(axis_world);
        state.point.push_back(joint_world.translation);
        state.rotational.push_back(true);
        break;
      case JointKind::Prismatic:
        state.axis.push_back(axis_world);
        state.point.push_back(joint_world.translation);
        state.rotational.push_back(false);
        break;
      case JointKind::Cylindrical:
        state.axis.push_back(axis_world);
        state.point.push_back(joint_world.translation);
        state.rotational.push_back(true);
        state.axis.push_back(axis_world);
        state.point.push_back(joint_world.translation);
        state.rotational.push_back(false);
        break;
      case JointKind::Cartesian: {
        const Mat3 r = joint_world.rotation.matrix();
        for (int c = 0; c < 3; ++c) {
          state.axis.push_back(r.col(c));
          state.point.push_back(joint_world.translation);
          state.rotational.push_back(false);
        }
        break;
      }
    }
  }
  return state;
}

// Residual vector: position error rows, then (when an angular target is set
// and violated) the direction correction rows.
Eigen::VectorXd task_residual(const EffectorState& state,
                              const ReachTarget& target, double* norm_out) {
  Vec3 ang_rows = Vec3::Zero();
  double ang_excess = 0.0;
  if (target.angular_target) {
    const Vec3 desired = target.angular_target->axis.normalized();
    const Vec3 dir = state.direction.normalized();
    const double angle =
        std::atan2(dir.cross(desired).norm(), dir.dot(desired));
    const double allowed =
        target.angular_target->max_deviation_deg * M_PI / 180.0;
    ang_excess = std::max(0.0, angle - allowed);
    if (ang_excess > 0.0) {
      Vec3 pivot = dir.cross(desired);
      if (pivot.norm() < 1e-12) {
        // Anti-parallel: pick a deterministic perpendicular.
        pivot = dir.cross(std::abs(dir.x()) < 0.9 ? Vec3::UnitX()
                                                  : Vec3::UnitY());
      }
      pivot.normalize();
      ang_rows = ang_excess * pivot.cross(dir);
    }
  }
  const Vec3 pos_err = target.target - state.position;
  const int rows = target.angular_target ? 6 : 3;
  Eigen::VectorXd r(rows);
  r.head<3>() = pos_err;
  if (rows == 6) r.tail<3>() = ang_rows;
  if (norm_out)
    *norm_out = std::sqrt(pos_err.squaredNorm() + ang_excess * ang_excess);
  return r;
}

}  // namespace

IkResult ik_solve(const KinematicTree& tree, const PlacementSet& placements,
                  const ReachTarget& target, const IkOptions& options) {
  const auto chain = chain_to(tree, target.part_id);
  int total_dofs = 0;
  for (const auto& id : chain)
    total_dofs += joint_dof_count(tree.part(id).joint->kind);
  if (total_dofs == 0)
    throw NoDofOnChain("no joint coordinates on the chain to part '" +
                       target.part_id + "'");

  PoseVector pose = rest_pose(tree);
  auto chain_limits = [&](int k) -> const std::array<double, 2>& {
    int off = 0;
    for (const auto& id : chain) {
      const JointSpec& joint = *tree.part(id).joint;
      const int dof = joint_dof_count(joint.kind);
      if (k < off + dof) return joint.limits[k - off];
      off += dof;
    }
    throw ValidationError("chain dof index out of range");
  };
  auto apply_chain = [&](PoseVector& p, const Eigen::VectorXd& theta) {
    int off = 0;
    for (const auto& id : chain) {
      const int dof = joint_dof_count(tree.part(id).joint->kind);
      for (int d = 0; d < dof; ++d) p[id][d] = theta[off + d];
      off += dof;
    }
  };

  Eigen::VectorXd theta(total_dofs);
  {
    int off = 0;
    for (const auto& id : chain)
      for (double v : pose.at(id)) theta[off++] = v;
  }

  IkResult best;
  best.pose = pose;
  double residual_norm;
  EffectorState state = effector_state(tree, placements, pose, target);
  Eigen::VectorXd residual = task_residual(state, target, &residual_norm);
  best.residual = residual_norm;
  best.residual_trace.push_back(residual_norm);

  const double lambda2 = options.damping * options.damping;
  Eigen::VectorXd cur_theta = theta;
  double cur_norm = residual_norm;

  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (cur_norm < 1e-12) break;
    const int rows = static_cast<int>(residual.size());
    Eigen::MatrixXd jac(rows, total_dofs);
    for (int k = 0; k < total_dofs; ++k) {
      Vec3 dp, dd;
      if (state.rotational[k]) {
        dp = state.axis[k].cross(state.position - state.point[k]);
        dd = state.axis[k].cross(state.direction);
      } else {
        dp = state.axis[k];
        dd = Vec3::Zero();
      }
      jac.block<3, 1>(0, k) = dp;
      if (rows == 6) jac.block<3, 1>(3, k) = dd;
    }

    const Eigen::MatrixXd jjt =
        jac * jac.transpose() +
        lambda2 * Eigen::MatrixXd::Identity(rows, rows);
    Eigen::VectorXd step = jac.transpose() * jjt.ldlt().solve(residual);
    // Uniform scaling preserves the step direction near singular stretches.
    const double biggest = step.cwiseAbs().maxCoeff();
    if (biggest > options.step_clamp) step *= options.step_clamp / biggest;

    // Backtrack if the step grows the residual.
    bool accepted = false;
    for (int half = 0; half < 5; ++half) {
      Eigen::VectorXd trial = cur_theta + step;
      for (int k = 0; k < total_dofs; ++k)
        trial[k] = std::clamp(trial[k], chain_limits(k)[0], chain_limits(k)[1]);
      PoseVector trial_pose = pose;
      apply_chain(trial_pose, trial);
      EffectorState trial_state =
          effector_state(tree, placements, trial_pose, target);
      double trial_norm;
      const Eigen::VectorXd trial_residual =
          task_residual(trial_state, target, &trial_norm);
      if (trial_norm <= cur_norm + 1e-15) {
        cur_theta = trial;
        cur_norm = trial_norm;
        pose = trial_pose;
        state = trial_state;
        residual = trial_residual;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (cur_norm < best.residual) {
      best.residual = cur_norm;
      best.pose = pose;
    }
    best.residual_trace.push_back(best.residual);
    if (!accepted) break;  // stalled
  }
  return best;
}

// ---------------------------------------------------------------------------
// Triangle-triangle intersection
// ---------------------------------------------------------------------------

namespace {

inline double orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& c) {
  return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool point_in_tri_2d(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                     const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  const double d1 = orient2d(a, b, p);
  const double d2 = orient2d(b, c, p);
  const double d3 = orient2d(c, a, p);
  const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  return !(has_neg && has_pos);
}

bool segments_intersect_2d(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                           const Eigen::Vector2d& q1,
                           const Eigen::Vector2d& q2) {
  const double d1 = orient2d(q1, q2, p1);
  const double d2 = orient2d(q1, q2, p2);
  const double d3 = orient2d(p1, p2, q1);
  const double d4 = orient2d(p1, p2, q2);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                       const Eigen::Vector2d& p) {
    return p.x() >= std::min(a.x(), b.x()) - 1e-15 &&
           p.x() <= std::max(a.x(), b.x()) + 1e-15 &&
           p.y() >= std::min(a.y(), b.y()) - 1e-15 &&
           p.y() <= std::max(a.y(), b.y()) + 1e-15;
  };
  if (d1 == 0 && on_segment(q1, q2, p1)) return true;
  if (d2 == 0 && on_segment(q1, q2, p2)) return true;
  if (d3 == 0 && on_segment(p1, p2, q1)) return true;
  if (d4 == 0 && on_segment(p1, p2, q2)) return true;
  return false;
}

bool coplanar_tri_tri(const Vec3& n, const Vec3 t1[3], const Vec3 t2[3]) {
  // Project on the dominant axis of the shared normal.
  int drop = 0;
  Vec3 an = n.cwiseAbs();
  if (an.y() > an.x()) drop = 1;
  if (an.z() > an[drop]) drop = 2;
  const int u = (drop + 1) % 3, v = (drop + 2) % 3;
  Eigen::Vector2d a[3], b[3];
  for (int i = 0; i < 3; ++i) {
    a[i] = {t1[i][u], t1[i][v]};
    b[i] = {t2[i][u], t2[i][v]};
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (segments_intersect_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]))
        return true;
  if (point_in_tri_2d(a[0], b[0], b[1], b[2])) return true;
  if (point_in_tri_2d(b[0], a[0], a[1], a[2])) return true;
  return false;
}

// Segment pq against triangle abc (inclusive bounds).
bool segment_triangle(const Vec3& p, const Vec3& q, const Vec3& a,
                      const Vec3& b, const Vec3& c) {
  const Vec3 dir = q - p;
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pvec = dir.cross(e2);
  const double det = e1.dot(pvec);
  if (std::abs(det) < 1e-15) return false;  // parallel; coplanar handled elsewhere
  const double inv = 1.0 / det;
  const Vec3 tvec = p - a;
  const double u = tvec.dot(pvec) * inv;
  if (u < 0.0 || u > 1.0) return false;
  const Vec3 qvec = tvec.cross(e1);
  const double v = dir.dot(qvec) * inv;
  if (v < 0.0 || u + v > 1.0) return false;
  const double t = e2.dot(qvec) * inv;
  return t >= 0.0 && t <= 1.0;
}

bool tri_tri_intersect(const Vec3 t1[3], const Vec3 t2[3]) {
  const Vec3 n1 = (t1[1] - t1[0]).cross(t1[2] - t1[0]);
  const Vec3 n2 = (t2[1] - t2[0]).cross(t2[2] - t2[0]);
  const double scale = std::max(n1.norm(), n2.norm());
  if (scale <= 0.0) return false;
  const double eps = 1e-12 * scale;

  double d2[3], d1[3];
  for (int i = 0; i < 3; ++i) {
    d2[i] = n1.dot(t2[i] - t1[0]);
    d1[i] = n2.dot(t1[i] - t2[0]);
  }
  const bool coplanar = std::abs(d2[0]) < eps && std::abs(d2[1]) < eps &&
                        std::abs(d2[2]) < eps;
  if (coplanar) return coplanar_tri_tri(n1, t1, t2);

  if ((d2[0] > eps && d2[1] > eps && d2[2] > eps) ||
      (d2[0] < -eps && d2[1] < -eps && d2[2] < -eps))
    return false;
  if ((d1[0] > eps && d1[1] > eps && d1[2] > eps) ||
      (d1[0] < -eps && d1[1] < -eps && d1[2] < -eps))
    return false;

  for (int i = 0; i < 3; ++i) {
    if (segment_triangle(t1[i], t1[(i + 1) % 3], t2[0], t2[1], t2[2]))
      return true;
    if (segment_triangle(t2[i], t2[(i + 1) % 3], t1[0], t1[1], t1[2]))
      return true;
  }
  return false;
}

const Vec3 kParityRays[3] = {
    Vec3(0.577350269189626, 0.577350269189626, 0.577350269189626),
    Vec3(-0.301511344577764, 0.904534033733291, -0.301511344577764),
    Vec3(0.275399957921694, -0.192779942339900, 0.941764856661990),
};

bool inside_by_parity(const Bvh& bvh, const Vec3& p, double t_min) {
  int votes = 0;
  for (const Vec3& dir : kParityRays) {
    if (bvh.count_ray_crossings(p, dir, t_min) & 1) ++votes;
  }
  return votes >= 2;
}

}  // namespace

bool meshes_intersect(const Bvh& a, const RigidTransform& ta, const Bvh& b,
                      const RigidTransform& tb) {
  // Work in B's rest frame.
  const RigidTransform rel = tb.inverse() * ta;
  std::vector<int> candidates;
  Vec3 tri[3];
  for (const auto& face : a.mesh().faces) {
    Aabb box;
    for (int k = 0; k < 3; ++k) {
      tri[k] = rel.apply(a.mesh().vertices[face[k]]);
      box.expand(tri[k]);
    }
    if (!box.overlaps(b.bounds())) continue;
    candidates.clear();
    b.collect_overlapping(box, candidates);
    for (int f : candidates) {
      Vec3 other[3];
      for (int k = 0; k < 3; ++k)
        other[k] = b.mesh().vertices[b.mesh().faces[f][k]];
      if (tri_tri_intersect(tri, other)) return true;
    }
  }
  return false;
}

CollisionBody::CollisionBody(const TriMesh& rest_mesh,
                             const CollisionParams& params)
    : bvh_(std::make_shared<Bvh>(rest_mesh)) {
  const auto samples =
      sample_surface(rest_mesh, params.surface_samples, params.seed);
  sample_points_.reserve(samples.size());
  sample_inward_.reserve(samples.size());
  for (const auto& s : samples) {
    sample_points_.push_back(s.position);
    sample_inward_.push_back(-rest_mesh.face_normal(s.face_index));
  }
}

double pair_penetration(const CollisionBody& a, const RigidTransform& ta,
                        const CollisionBody& b, const RigidTransform& tb,
                        double contact_tolerance) {
  // Broad phase on transformed bounds.
  auto world_bounds = [](const CollisionBody& body, const RigidTransform& t) {
    Aabb box;
    const Aabb& rb = body.bvh_->bounds();
    for (int i = 0; i < 8; ++i) {
      const Vec3 corner((i & 1) ? rb.max.x() : rb.min.x(),
                        (i & 2) ? rb.max.y() : rb.min.y(),
                        (i & 4) ? rb.max.z() : rb.min.z());
      box.expand(t.apply(corner));
    }
    return box;
  };
  if (!world_bounds(a, ta).overlaps(world_bounds(b, tb))) return 0.0;

  // Containment distance in the spirit of a minimal separating translation:
  // over candidate directions (the inward normals seen among contained
  // samples), the translation that frees every contained sample is the max
  // exit chord along that direction; the depth is the smallest such
  // requirement. Evaluated in `into`'s rest frame for each ordering.
  auto directed_depth = [](const CollisionBody& from, const RigidTransform& tf,
                           const CollisionBody& into,
                           const RigidTransform& ti) {
    const RigidTransform rel = ti.inverse() * tf;
    const Bvh& bvh = *into.bvh_;
    const double t_min = 1e-9 * bvh.bounds().diagonal();

    std::vector<Vec3> inside_points;
    std::vector<Vec3> candidate_dirs;
    for (std::size_t i = 0; i < from.sample_points_.size(); ++i) {
      const Vec3 p = rel.apply(from.sample_points_[i]);
      if (bvh.bounds().squared_distance(p) > 0.0) continue;
      if (!inside_by_parity(bvh, p, t_min)) continue;
      inside_points.push_back(p);
      const Vec3 dir = rel.rotation * from.sample_inward_[i];
      bool seen = false;
      for (const Vec3& d : candidate_dirs)
        if (d.dot(dir) > 0.99) seen = true;
      if (!seen && candidate_dirs.size() < 16) candidate_dirs.push_back(dir);
    }
    if (inside_points.empty()) return 0.0;

    double depth = std::numeric_limits<double>::infinity();
    for (const Vec3& dir : candidate_dirs) {
      double required = 0.0;
      for (const Vec3& p : inside_points) {
        const auto hit = bvh.first_ray_hit(p, dir, t_min);
        required = std::max(required, hit ? *hit : bvh.distance(p));
      }
      depth = std::min(depth, required);
    }
    return std::isfinite(depth) ? depth : 0.0;
  };

  double depth = std::max(directed_depth(a, ta, b, tb),
                          directed_depth(b, tb, a, ta));
  if (depth == 0.0 && meshes_intersect(*a.bvh_, ta, *b.bvh_, tb)) {
    // Surfaces cross but every sample classified outside (grazing contact):
    // report a small positive depth so the signal is monotone from zero.
    depth = 1e-6 * std::min(a.bvh_->bounds().diagonal(),
                            b.bvh_->bounds().diagonal());
  }
  return std::max(0.0, depth - contact_tolerance);
}

double collision_penetration(const std::vector<TriMesh>& meshes_world,
                             const CollisionParams& params) {
  if (meshes_world.size() < 2)
    throw ValidationError("collision_penetration needs at least 2 meshes");
  std::vector<CollisionBody> bodies;
  bodies.reserve(meshes_world.size());
  for (const TriMesh& m : meshes_world) bodies.emplace_back(m, params);
  double total = 0.0;
  for (std::size_t i = 0; i < bodies.size(); ++i)
    for (std::size_t j = i + 1; j < bodies.size(); ++j)
      total += pair_penetration(bodies[i], RigidTransform::identity(),
                                bodies[j], RigidTransform::identity(),
                                params.contact_tolerance);
  return total;
}

// ---------------------------------------------------------------------------
// Objectives
// ---------------------------------------------------------------------------

namespace {

// Per-tree collision geometry, built once per objective instance.
struct SceneBodies {
  std::map<std::string, CollisionBody> bodies;
  std::vector<std::pair<std::string, std::string>> pairs;  // sorted ids
  std::vector<bool> adjacent;  // parent-child in the tree
  double scene_diagonal = 0.0;
};

std::shared_ptr<SceneBodies> build_bodies(const KinematicTree& tree,
                                          const CollisionParams& params) {
  auto out = std::make_shared<SceneBodies>();
  Aabb scene_box;
  std::vector<std::string> ids;
  for (const auto& [id, part] : tree.parts) {
    out->bodies.emplace(id, CollisionBody(part.mesh, params));
    scene_box.expand(aabb(part.mesh));
    ids.push_back(id);
  }
  out->scene_diagonal = scene_box.diagonal();
  auto is_adjacent = [&](const std::string& x, const std::string& y) {
    const auto& px = tree.part(x).parent_id;
    const auto& py = tree.part(y).parent_id;
    return (px && *px == y) || (py && *py == x);
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      out->pairs.emplace_back(ids[i], ids[j]);
      out->adjacent.push_back(is_adjacent(ids[i], ids[j]));
    }
  }
  return out;
}

double scene_penetration(const AssembledScene& scene, SceneBodies& bodies,
                         const CollisionParams& params) {
  const double tol = 0.005 * bodies.scene_diagonal;
  double total = 0.0;
  for (const PoseVector& pose : scene.poses_or_rest()) {
    const auto world = assembled_world(*scene.tree, scene.placements, pose);
    for (std::size_t k = 0; k < bodies.pairs.size(); ++k) {
      const auto& [ia, ib] = bodies.pairs[k];
      total += pair_penetration(
          bodies.bodies.at(ia), world.at(ia), bodies.bodies.at(ib),
          world.at(ib),
          bodies.adjacent[k] ? tol : params.contact_tolerance);
    }
  }
  return total;
}

// Lazily keyed by tree pointer so one Objective can serve many scenes.
struct BodiesCache {
  std::mutex mu;
  std::map<const KinematicTree*, std::shared_ptr<SceneBodies>> by_tree;

  std::shared_ptr<SceneBodies> get(const KinematicTree& tree,
                                   const CollisionParams& params) {
    std::lock_guard<std::mutex> lock(mu);
    auto& entry = by_tree[&tree];
    if (!entry) entry = build_bodies(tree, params);
    return entry;
  }
};

}  // namespace

Objective pack_objective(const PackSpec& spec, const CollisionParams& params) {
  if (spec.box_half_extent <= 0.0)
    throw ValidationError("pack box half extent must be > 0");
  auto cache = std::make_shared<BodiesCache>();
  return [spec, params, cache](const AssembledScene& scene) -> double {
    double excess_sq = 0.0;
    const Vec3 lo = spec.box_center - Vec3::Constant(spec.box_half_extent);
    const Vec3 hi = spec.box_center + Vec3::Constant(spec.box_half_extent);
    for (const PoseVector& pose : scene.poses_or_rest()) {
      const auto world = assembled_world(*scene.tree, scene.placements, pose);
      for (const auto& [id, part] : scene.tree->parts) {
        Aabb box;
        for (const Vec3& v : part.mesh.vertices)
          box.expand(world.at(id).apply(v));
        for (int c = 0; c < 3; ++c) {
          const double over = std::max(0.0, box.max[c] - hi[c]);
          const double under = std::max(0.0, lo[c] - box.min[c]);
          excess_sq += over * over + under * under;
        }
      }
    }
    auto bodies = cache->get(*scene.tree, params);
    return excess_sq + scene_penetration(scene, *bodies, params);
  };
}

Objective collision_objective(const CollisionParams& params) {
  auto cache = std::make_shared<BodiesCache>();
  return [params, cache](const AssembledScene& scene) -> double {
    auto bodies = cache->get(*scene.tree, params);
    return scene_penetration(scene, *bodies, params);
  };
}

Objective reach_objective(const std::vector<ReachTarget>& targets,
                          const IkOptions& options) {
  if (targets.empty()) throw EmptyInput("reach_objective: no targets");
  return [targets, options](const AssembledScene& scene) -> double {
    double total = 0.0;
    for (const ReachTarget& target : targets) {
      const IkResult res =
          ik_solve(*scene.tree, scene.placements, target, options);
      total += res.residual * res.residual;
    }
    return total;
  };
}

Objective trajectory_objective(const Trajectory& trajectory,
                               const IkOptions& options) {
  if (trajectory.waypoints.size() < 2)
    throw ValidationError("trajectory needs at least 2 waypoints");
  for (std::size_t i = 1; i < trajectory.waypoints.size(); ++i) {
    if (trajectory.waypoints[i].first <= trajectory.waypoints[i - 1].first)
      throw ValidationError("trajectory time parameters must be increasing");
  }
  return [trajectory, options](const AssembledScene& scene) -> double {
    double total = 0.0;
    for (const auto& [t, point] : trajectory.waypoints) {
      ReachTarget target;
      target.part_id = trajectory.part_id;
      target.effector_point = trajectory.effector_point;
      target.target = point;
      const IkResult res =
          ik_solve(*scene.tree, scene.placements, target, options);
      total += res.residual * res.residual;
    }
    return total / static_cast<double>(trajectory.waypoints.size());
  };
}

Objective combine_objectives(
    const std::vector<std::pair<Objective, double>>& weighted_terms) {
  for (const auto& [obj, weight] : weighted_terms) {
    if (!obj) throw ValidationError("combine_objectives: null objective");
    if (weight <= 0.0)
      throw ValidationError("combine_objectives: weights must be > 0");
  }
  return [weighted_terms](const AssembledScene& scene) -> double {
    double total = 0.0;
    for (const auto& [obj, weight] : weighted_terms)
      total += weight * obj(scene);
    return total;
  };
}

}  // namespace kitbash
