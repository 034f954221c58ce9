// Annealed Langevin dynamics over the placement set: Monte-Carlo score
// estimation with split Euclidean/SO(3) transition kernels, and inner
// attachment refinement inside the target-density evaluation.
#pragma once

#include "kitbash/attachment.hpp"
#include "kitbash/functionality.hpp"
#include "kitbash/priors.hpp"

namespace kitbash {

// Everything the target density needs: attachment problems per part (parts
// without one contribute no attachment energy; keep them in parent-before-
// child order), the task objective, and the optional regularizers.
struct SceneModel {
  const KinematicTree* tree = nullptr;
  std::vector<AttachmentProblem> attachments;
  Objective objective;  // empty: attachment-only exploration
  std::vector<PinConstraint> pins;
  std::vector<std::pair<std::string, TransformPrior>> priors;
  std::vector<PoseVector> objective_pose_set;
  SolverConfig solver;
};

struct SamplerConfig {
  int total_steps = 300;
  // Descending step sizes in iteration order; filled geometrically from
  // alpha_start/alpha_end when empty.
  std::vector<double> step_schedule;
  double alpha_start = 0.1;
  double alpha_end = 1e-3;
  int score_samples = 30;
  double lambda = 1.0;       // attachment-energy temperature
  double trans_noise = 0.1;  // translational kernel scale (length units)
  double rot_noise = 0.3;    // rotational kernel scale (radians)
  std::uint64_t seed = 0;
  int inner_refine_iters = 3;
  int checkpoint_interval = 25;
  int threads = 1;
};

void validate_sampler_config(const SamplerConfig& config);

// Geometric interpolation from alpha_start down to alpha_end over `steps`
// values (constant when steps == 1 or the endpoints match).
std::vector<double> anneal_schedule(double alpha_start, double alpha_end,
                                    int steps);

struct DensityResult {
  double log_density = 0.0;
  PlacementSet refined;
  double attachment = 0.0;
  double functionality = 0.0;
  double prior = 0.0;
  double pin = 0.0;
};

// Refines each attached part for `inner_refine_iters` outer iterations from
// the given placements, then returns
//   -(attachment + prior + pin)/lambda - functionality
// on the refined configuration, together with the refined placements.
// inner_refine_iters == 0 evaluates the raw placements directly.
DensityResult target_log_density(const SceneModel& model,
                                 const PlacementSet& placements, double lambda,
                                 int inner_refine_iters);

// One transition-kernel draw: per part, translation += sqrt(alpha) *
// trans_noise * N(0, I); rotation left-composed with an IGSO(3) draw at scale
// sqrt(alpha) * rot_noise.
PlacementSet propose(const PlacementSet& current, double alpha,
                     const SamplerConfig& config, Rng& rng);

struct TangentScore {
  Vec3 translational = Vec3::Zero();
  Vec3 rotational = Vec3::Zero();
};

struct ScoreEstimate {
  std::map<std::string, TangentScore> score;
  // Best candidate seen while weighting (refined), for best-so-far tracking.
  double best_log_density = -std::numeric_limits<double>::infinity();
  PlacementSet best_refined;
};

// Density-weighted average of transition-kernel gradients over
// `score_samples` candidates drawn around `current`: analytic Gaussian
// gradient for translations, finite-difference IGSO(3) gradient for
// rotations. Weights are max-shifted; candidates below 1e-12 of the max are
// dropped. Throws AllWeightsZero when no candidate has finite density.
ScoreEstimate estimate_score(const SceneModel& model,
                             const PlacementSet& current, double alpha,
                             const SamplerConfig& config, int step_index);

struct StepRecord {
  int step = 0;
  double alpha = 0.0;
  double current_energy = 0.0;  // -log density of the chain state
  double best_energy = 0.0;     // non-increasing
};

struct SamplerTrace {
  std::vector<StepRecord> records;
  std::vector<std::pair<int, PlacementSet>> checkpoints;
};

struct SamplerResult {
  PlacementSet best;  // refined placements of the best density seen
  double best_log_density = 0.0;
  SamplerTrace trace;
};

// Anneals the chain from noisy initial placements; deterministic for a fixed
// seed at any thread count. Tracks the best target_log_density configuration
// over every density evaluation (chain states and score candidates).
SamplerResult run_sampler(const SceneModel& model, const SamplerConfig& config);

}  // namespace kitbash
