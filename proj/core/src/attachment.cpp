#include "kitbash/attachment.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <sstream>

namespace kitbash {

double welsch(double x, double nu) {
  if (nu <= 0.0) throw ValidationError("welsch: nu must be > 0");
  const double z = x / nu;
  return 1.0 - std::exp(-0.5 * z * z);
}

void AttachmentProblem::finalize() {
  if (pose_motions.empty())
    throw ValidationError("attachment problem has no poses");
  if (reference_vdfs.size() != pose_motions.size())
    throw ValidationError(
        "attachment problem: reference_vdfs and pose_motions differ in length");
  if (part_rest_samples.empty())
    throw ValidationError("attachment problem has no samples");
  if (!new_parent) throw ValidationError("attachment problem has no parent");
  for (const VdfSnapshot& snap : reference_vdfs) {
    if (snap.size() != part_rest_samples.size())
      throw ValidationError(
          "attachment problem: snapshot size does not match sample count");
  }
  posed_points.assign(pose_motions.size(), {});
  for (std::size_t i = 0; i < pose_motions.size(); ++i) {
    posed_points[i].reserve(part_rest_samples.size());
    for (const SurfaceSample& s : part_rest_samples)
      posed_points[i].push_back(pose_motions[i].apply(s.position));
  }
}

AttachmentProblem build_problem(const KinematicPart& part,
                                const TriMesh& new_parent,
                                int snapshots_per_dof, int sample_budget) {
  if (!part.source_parent_mesh)
    throw MissingSourceParent("part '" + part.id +
                              "' has no source parent mesh");
  if (!part.joint)
    throw ValidationError("part '" + part.id + "' has no joint");
  validate_joint(*part.joint);
  validate_mesh(new_parent);

  AttachmentProblem problem;
  problem.part_id = part.id;
  problem.parent_part_id = part.parent_id.value_or("");
  problem.new_parent = std::make_shared<Bvh>(new_parent);

  const int nv = static_cast<int>(part.mesh.vertex_count());
  const int count = std::min(nv, sample_budget);
  problem.part_rest_samples = sample_surface(part.mesh, count, 0x7a57e5);

  // Sweep this part's own joint, one coordinate at a time, the rest at the
  // lower limits.
  const JointSpec& joint = *part.joint;
  const int dof = joint_dof_count(joint.kind);
  std::vector<double> lower;
  for (const auto& lim : joint.limits) lower.push_back(lim[0]);
  for (int d = 0; d < dof; ++d) {
    for (int i = 0; i < snapshots_per_dof; ++i) {
      std::vector<double> theta = lower;
      theta[d] = joint.limits[d][0] +
                 (joint.limits[d][1] - joint.limits[d][0]) * i /
                     (snapshots_per_dof - 1);
      PoseVector pose;
      pose[part.id] = theta;
      problem.poses.push_back(std::move(pose));
      problem.pose_motions.push_back(joint_motion(joint, theta));
    }
  }

  const Bvh source_parent(*part.source_parent_mesh);
  for (const RigidTransform& motion : problem.pose_motions) {
    std::vector<SurfaceSample> advected = problem.part_rest_samples;
    for (SurfaceSample& s : advected) s.position = motion.apply(s.position);
    problem.reference_vdfs.push_back(compute_vdf(advected, source_parent));
  }

  problem.finalize();
  return problem;
}

namespace {

// Residual of one correspondence: (R h - u) . n with u = proj(x) - x.
inline double plane_residual(const Rotation& placement_rot, const Vec3& h,
                             const Vec3& x, const Projection& proj) {
  const Vec3 u = proj.point - x;
  return (placement_rot * h - u).dot(proj.normal);
}

}  // namespace

double eval_attachment_energy(const AttachmentProblem& problem,
                              const RigidTransform& placement,
                              double welsch_nu, int* dropped_samples) {
  if (welsch_nu <= 0.0) throw ValidationError("welsch_nu must be > 0");
  const Bvh& parent = *problem.new_parent;
  double energy = 0.0;
  int dropped = 0;
  for (std::size_t i = 0; i < problem.pose_count(); ++i) {
    const VdfSnapshot& ref = problem.reference_vdfs[i];
    const auto& posed = problem.posed_points[i];
    for (std::size_t j = 0; j < posed.size(); ++j) {
      const Vec3 x = placement.apply(posed[j]);
      const Projection proj = parent.closest_point(x);
      if (proj.normal.squaredNorm() < 0.25) {
        ++dropped;
        continue;
      }
      energy += welsch(plane_residual(placement.rotation, ref.offsets[j], x, proj),
                       welsch_nu);
    }
  }
  if (dropped_samples) *dropped_samples += dropped;
  return energy;
}

RigidTransform local_step(const AttachmentProblem& problem, int pose_index,
                          const RigidTransform& anchor,
                          const RigidTransform& q_init,
                          const SolverConfig& config, int* dropped_samples) {
  if (pose_index < 0 ||
      pose_index >= static_cast<int>(problem.pose_count()))
    throw ValidationError("local_step: pose index out of range");

  const Bvh& parent = *problem.new_parent;
  const VdfSnapshot& ref = problem.reference_vdfs[pose_index];
  const auto& posed = problem.posed_points[pose_index];
  const double nu = config.welsch_nu;
  const double inv_2nu2 = 0.5 / (nu * nu);

  RigidTransform q = q_init;
  for (int sweep = 0; sweep < config.irls_iters; ++sweep) {
    Mat6 a_mat = Mat6::Zero();
    Vec6 b_vec = Vec6::Zero();
    for (std::size_t j = 0; j < posed.size(); ++j) {
      const Vec3 x = q.apply(posed[j]);
      const Projection proj = parent.closest_point(x);
      if (proj.normal.squaredNorm() < 0.25) {
        if (dropped_samples) ++(*dropped_samples);
        continue;
      }
      const Vec3 rh = q.rotation * ref.offsets[j];
      const Vec3 u = proj.point - x;
      const double s = (rh - u).dot(proj.normal);
      const double w = std::exp(-s * s * inv_2nu2);
      Vec6 jac;
      jac << (rh + x).cross(proj.normal), proj.normal;
      a_mat.noalias() += w * jac * jac.transpose();
      b_vec.noalias() += w * s * jac;
    }

    // Pull toward the anchor placement, linearized in the left twist.
    const Vec6 to_anchor = se3_log(anchor * q.inverse()).vector();
    const Mat6 system = 2.0 * a_mat + config.rho * Mat6::Identity();
    const Vec6 rhs = -2.0 * b_vec + config.rho * to_anchor;
    const Eigen::LDLT<Mat6> ldlt(system);
    if (ldlt.info() != Eigen::Success)
      throw SingularSystem("local_step: normal matrix is rank-deficient");
    Vec6 delta = ldlt.solve(rhs);
    if (!delta.allFinite())
      throw SingularSystem("local_step: normal system produced non-finite step");
    // Sanity clamp against pathological jumps; inactive near convergence.
    const double step_norm = delta.norm();
    if (step_norm > 0.5) delta *= 0.5 / step_norm;
    q = se3_exp(Twist::from_vector(delta)) * q;
  }
  return q;
}

RigidTransform global_step(std::span<const RigidTransform> per_pose) {
  return lie_mean(per_pose);
}

AttachmentResult solve_attachment(const AttachmentProblem& problem,
                                  const RigidTransform& init,
                                  const SolverConfig& config) {
  if (config.rho <= 0.0)
    throw SingularSystem("solve_attachment: rho must be > 0");
  if (config.max_outer_iters < 1)
    throw ValidationError("solve_attachment: max_outer_iters must be >= 1");

  AttachmentResult result;
  result.per_pose_transforms.assign(problem.pose_count(), init);

  RigidTransform placement = init;
  double energy = eval_attachment_energy(problem, placement, config.welsch_nu,
                                         &result.dropped_samples);
  result.energy_trace.push_back(energy);
  result.placement = placement;
  double best_energy = energy;

  for (int outer = 0; outer < config.max_outer_iters; ++outer) {
    for (std::size_t i = 0; i < problem.pose_count(); ++i) {
      result.per_pose_transforms[i] = local_step(
          problem, static_cast<int>(i), placement,
          result.per_pose_transforms[i], config, &result.dropped_samples);
    }
    placement = global_step(result.per_pose_transforms);
    const double prev = energy;
    energy = eval_attachment_energy(problem, placement, config.welsch_nu);
    result.energy_trace.push_back(energy);
    if (energy < best_energy) {
      best_energy = energy;
      result.placement = placement;
    }
    if (std::abs(prev - energy) / std::max(prev, 1e-12) <
        config.convergence_tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace kitbash
