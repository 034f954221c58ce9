// Kinematics-aware attachment: a part's reference offset field (against its
// original parent, sampled over its articulation range) is matched to the
// offset field against a new parent, with robust point-to-plane residuals,
// and minimized by alternating per-pose fits with a Lie-algebra average.
#pragma once

#include <memory>
#include <span>

#include "kitbash/kinematics.hpp"
#include "kitbash/sampling.hpp"

namespace kitbash {

// Bounded robust loss 1 - exp(-x^2 / (2 nu^2)); even, saturating at 1.
double welsch(double x, double nu);

struct AttachmentProblem {
  std::string part_id;
  // Part whose rest frame the parent geometry lives in; empty for a static
  // world parent. Placements passed to the evaluation are then relative to
  // that part's placement.
  std::string parent_part_id;
  // One snapshot per sampled pose, computed against the source parent.
  std::vector<VdfSnapshot> reference_vdfs;
  std::shared_ptr<const Bvh> new_parent;
  // Joint coordinates per pose (informational) and the rigid motion each pose
  // applies to the part's rest geometry.
  std::vector<PoseVector> poses;
  std::vector<RigidTransform> pose_motions;
  std::vector<SurfaceSample> part_rest_samples;

  // Derived: pose_motions[i] applied to every rest sample.
  std::vector<std::vector<Vec3>> posed_points;

  std::size_t pose_count() const { return pose_motions.size(); }
  std::size_t sample_count() const { return part_rest_samples.size(); }

  // Checks shape invariants and fills posed_points. Call after assembling a
  // problem by hand; build_problem does it for you.
  void finalize();
};

struct SolverConfig {
  double rho = 1e4;              // geodesic penalty weight
  int max_outer_iters = 20;
  int irls_iters = 4;
  double welsch_nu = 0.5;
  double convergence_tol = 1e-4; // relative energy decrease
};

struct AttachmentResult {
  RigidTransform placement;
  std::vector<RigidTransform> per_pose_transforms;
  std::vector<double> energy_trace;  // energy at init, then per outer iteration
  bool converged = false;
  int dropped_samples = 0;           // degenerate-normal samples skipped
};

// Reference offsets for `part` against its source parent, swept over the
// part's own joint range (snapshots_per_dof values per DoF, one coordinate at
// a time). Sample budget: the part's vertices when there are at most
// `sample_budget` of them, else `sample_budget` area-weighted samples.
AttachmentProblem build_problem(const KinematicPart& part,
                                const TriMesh& new_parent,
                                int snapshots_per_dof = 5,
                                int sample_budget = 2000);

// Attachment energy of a placement: over poses i and samples j,
//   welsch( (R u_ref - u_new) . n )
// with u_new and the new-parent normal n recomputed at call time.
double eval_attachment_energy(const AttachmentProblem& problem,
                              const RigidTransform& placement,
                              double welsch_nu = 0.5,
                              int* dropped_samples = nullptr);

// One per-pose fit: IRLS on the robust point-to-plane system with the
// geodesic pull toward `anchor` as a Tikhonov term in the twist variable.
RigidTransform local_step(const AttachmentProblem& problem, int pose_index,
                          const RigidTransform& anchor,
                          const RigidTransform& q_init,
                          const SolverConfig& config,
                          int* dropped_samples = nullptr);

// Lie-algebra average binding the per-pose fits into one placement.
RigidTransform global_step(std::span<const RigidTransform> per_pose);

// Alternate local fits (all poses) and the global average, starting from
// `init`; returns the best-energy placement seen. The energy trace records
// eval_attachment_energy at init and after every outer iteration; iteration
// stops at max_outer_iters or when the relative energy change per iteration
// falls below convergence_tol.
AttachmentResult solve_attachment(const AttachmentProblem& problem,
                                  const RigidTransform& init,
                                  const SolverConfig& config = {});

}  // namespace kitbash
