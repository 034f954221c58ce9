#include "kitbash/langevin.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace kitbash {

namespace {

RigidTransform placement_of(const PlacementSet& placements,
                            const std::string& id) {
  const auto it = placements.find(id);
  return it != placements.end() ? it->second : RigidTransform::identity();
}

// Run fn(i) for i in [0, n) over `threads` workers; results must be written
// to per-index slots so the outcome is order-independent.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= n) break;
          fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

void validate_sampler_config(const SamplerConfig& config) {
  if (config.total_steps < 1)
    throw ValidationError("sampler: total_steps must be >= 1");
  if (config.score_samples < 1)
    throw ValidationError("sampler: score_samples must be >= 1");
  if (config.lambda <= 0.0) throw ValidationError("sampler: lambda must be > 0");
  if (config.trans_noise <= 0.0 || config.rot_noise <= 0.0)
    throw ValidationError("sampler: noise scales must be > 0");
  if (config.alpha_start < config.alpha_end || config.alpha_end <= 0.0)
    throw ValidationError("sampler: need alpha_start >= alpha_end > 0");
  if (!config.step_schedule.empty()) {
    if (static_cast<int>(config.step_schedule.size()) != config.total_steps)
      throw ValidationError("sampler: schedule length != total_steps");
    for (std::size_t i = 0; i < config.step_schedule.size(); ++i) {
      if (config.step_schedule[i] <= 0.0)
        throw ValidationError("sampler: schedule entries must be > 0");
      if (i > 0 && config.step_schedule[i] > config.step_schedule[i - 1])
        throw ValidationError("sampler: schedule must be non-increasing");
    }
  }
  if (config.inner_refine_iters < 0)
    throw ValidationError("sampler: inner_refine_iters must be >= 0");
  if (config.checkpoint_interval < 1)
    throw ValidationError("sampler: checkpoint_interval must be >= 1");
}

std::vector<double> anneal_schedule(double alpha_start, double alpha_end,
                                    int steps) {
  if (steps < 1) throw ValidationError("anneal_schedule: steps must be >= 1");
  if (alpha_start < alpha_end || alpha_end <= 0.0)
    throw ValidationError("anneal_schedule: need alpha_start >= alpha_end > 0");
  std::vector<double> schedule(steps);
  if (steps == 1) {
    schedule[0] = alpha_start;
    return schedule;
  }
  const double ratio = alpha_end / alpha_start;
  for (int i = 0; i < steps; ++i)
    schedule[i] = alpha_start * std::pow(ratio, static_cast<double>(i) /
                                                    (steps - 1));
  return schedule;
}

DensityResult target_log_density(const SceneModel& model,
                                 const PlacementSet& placements, double lambda,
                                 int inner_refine_iters) {
  DensityResult out;
  out.refined = placements;

  // Attachment is a child-vs-parent relation, so energies and refinement act
  // on the placement relative to the (already refined) parent. Problems are
  // expected in parent-before-child order.
  for (const AttachmentProblem& problem : model.attachments) {
    const RigidTransform parent =
        problem.parent_part_id.empty()
            ? RigidTransform::identity()
            : placement_of(out.refined, problem.parent_part_id);
    const RigidTransform relative =
        parent.inverse() * placement_of(out.refined, problem.part_id);
    if (inner_refine_iters > 0) {
      SolverConfig cfg = model.solver;
      cfg.max_outer_iters = inner_refine_iters;
      const AttachmentResult res = solve_attachment(problem, relative, cfg);
      out.refined[problem.part_id] = parent * res.placement;
      out.attachment +=
          *std::min_element(res.energy_trace.begin(), res.energy_trace.end());
    } else {
      out.attachment +=
          eval_attachment_energy(problem, relative, model.solver.welsch_nu);
    }
  }

  if (model.objective) {
    AssembledScene scene;
    scene.tree = model.tree;
    scene.placements = out.refined;
    scene.pose_set = model.objective_pose_set;
    out.functionality = model.objective(scene);
  }
  for (const auto& [part_id, prior] : model.priors)
    out.prior += prior_energy(prior, placement_of(out.refined, part_id));
  for (const PinConstraint& pin : model.pins)
    out.pin += pin_energy(pin, placement_of(out.refined, pin.part_id),
                          model.tree->part(pin.part_id).mesh);

  out.log_density =
      -(out.attachment + out.prior + out.pin) / lambda - out.functionality;
  return out;
}

PlacementSet propose(const PlacementSet& current, double alpha,
                     const SamplerConfig& config, Rng& rng) {
  if (alpha <= 0.0) throw ValidationError("propose: alpha must be > 0");
  const double sa = std::sqrt(alpha);
  const Igso3Params rot_kernel{sa * config.rot_noise, 200};
  PlacementSet out;
  for (const auto& [id, placement] : current) {
    RigidTransform next = placement;
    next.translation += sa * config.trans_noise * rng.normal3();
    next.rotation = igso3_sample(rot_kernel, rng) * placement.rotation;
    out.emplace(id, next);
  }
  return out;
}

ScoreEstimate estimate_score(const SceneModel& model,
                             const PlacementSet& current, double alpha,
                             const SamplerConfig& config, int step_index) {
  const int n = config.score_samples;
  const double sa = std::sqrt(alpha);
  const double trans_var = alpha * config.trans_noise * config.trans_noise;
  const Igso3Params rot_kernel{sa * config.rot_noise, 200};

  struct Candidate {
    PlacementSet placements;
    DensityResult density;
    std::map<std::string, TangentScore> grads;
    bool finite = false;
  };
  std::vector<Candidate> candidates(n);

  const Rng base(config.seed);
  parallel_for(n, config.threads, [&](int k) {
    Candidate& cand = candidates[k];
    Rng rng = base.substream(1000003ull * (step_index + 1), k);
    cand.placements = propose(current, alpha, config, rng);
    cand.density = target_log_density(model, cand.placements, config.lambda,
                                      config.inner_refine_iters);
    cand.finite = std::isfinite(cand.density.log_density);
    if (!cand.finite) return;
    for (const auto& [id, cur] : current) {
      const RigidTransform& origin = cand.placements.at(id);
      TangentScore g;
      g.translational = -(cur.translation - origin.translation) / trans_var;
      g.rotational =
          igso3_log_density_grad(cur.rotation, origin.rotation, rot_kernel);
      cand.grads[id] = g;
    }
  });

  double max_logp = -std::numeric_limits<double>::infinity();
  for (const Candidate& cand : candidates)
    if (cand.finite) max_logp = std::max(max_logp, cand.density.log_density);
  if (!std::isfinite(max_logp))
    throw AllWeightsZero(
        "estimate_score: no candidate produced a finite density");

  ScoreEstimate out;
  for (const auto& [id, placement] : current) out.score[id] = TangentScore{};
  double weight_sum = 0.0;
  for (const Candidate& cand : candidates) {
    if (!cand.finite) continue;
    const double w = std::exp(cand.density.log_density - max_logp);
    if (cand.density.log_density > out.best_log_density) {
      out.best_log_density = cand.density.log_density;
      out.best_refined = cand.density.refined;
    }
    if (w < 1e-12) continue;
    weight_sum += w;
    for (const auto& [id, g] : cand.grads) {
      out.score[id].translational += w * g.translational;
      out.score[id].rotational += w * g.rotational;
    }
  }
  for (auto& [id, g] : out.score) {
    g.translational /= weight_sum;
    g.rotational /= weight_sum;
  }
  return out;
}

SamplerResult run_sampler(const SceneModel& model,
                          const SamplerConfig& config) {
  validate_sampler_config(config);
  if (!model.tree) throw ValidationError("run_sampler: no tree");

  const std::vector<double> schedule =
      config.step_schedule.empty()
          ? anneal_schedule(config.alpha_start, config.alpha_end,
                            config.total_steps)
          : config.step_schedule;

  const Rng base(config.seed);

  // Initial chain state: configured initial placements perturbed by one
  // kernel draw at the configured noise scales.
  PlacementSet current;
  {
    const Igso3Params rot_kernel{config.rot_noise, 200};
    int idx = 0;
    for (const std::string& id : model.tree->non_root_ids()) {
      Rng rng = base.substream(0xA11CEull, idx++);
      RigidTransform p = model.tree->part(id).initial_placement;
      p.translation += config.trans_noise * rng.normal3();
      p.rotation = igso3_sample(rot_kernel, rng) * p.rotation;
      current.emplace(id, p);
    }
  }

  SamplerResult result;
  result.best_log_density = -std::numeric_limits<double>::infinity();

  for (int step = 0; step < config.total_steps; ++step) {
    const double alpha = schedule[step];
    const double sa = std::sqrt(alpha);

    const DensityResult cur_density = target_log_density(
        model, current, config.lambda, config.inner_refine_iters);
    if (cur_density.log_density > result.best_log_density) {
      result.best_log_density = cur_density.log_density;
      result.best = cur_density.refined;
    }

    const ScoreEstimate est =
        estimate_score(model, current, alpha, config, step);
    if (est.best_log_density > result.best_log_density) {
      result.best_log_density = est.best_log_density;
      result.best = est.best_refined;
    }

    result.trace.records.push_back({step, alpha, -cur_density.log_density,
                                    -result.best_log_density});
    if (step % config.checkpoint_interval == 0)
      result.trace.checkpoints.emplace_back(step, current);

    // Langevin update; the rotational drift and noise combine in one Exp,
    // left-composed so the state stays on the group.
    const Igso3Params rot_kernel{sa * config.rot_noise, 200};
    int idx = 0;
    for (auto& [id, placement] : current) {
      Rng rng = base.substream(1000003ull * (step + 1),
                               static_cast<std::uint64_t>(config.score_samples) +
                                   idx++);
      const TangentScore& g = est.score.at(id);
      placement.translation += 0.5 * alpha * g.translational +
                               sa * config.trans_noise * rng.normal3();
      const Vec3 noise = so3_log(igso3_sample(rot_kernel, rng));
      placement.rotation =
          so3_exp(0.5 * alpha * g.rotational + noise) * placement.rotation;
      if (placement.rotation.orthonormality_error() > 1e-10)
        placement.rotation = placement.rotation.renormalized();
    }
  }
  return result;
}

}  // namespace kitbash
