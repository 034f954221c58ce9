#include "kitbash/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "kitbash/obj_io.hpp"

namespace kitbash {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Strict JSON helpers
// ---------------------------------------------------------------------------

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key))
      throw SchemaError(context + ": unknown field '" + key + "'");
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& context) {
  const auto it = obj.find(key);
  if (it == obj.end())
    throw SchemaError(context + ": missing required field '" + key + "'");
  return *it;
}

double get_number(const json& v, const std::string& context) {
  if (!v.is_number()) throw SchemaError(context + ": expected a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& context) {
  if (!v.is_number_integer())
    throw SchemaError(context + ": expected an integer");
  return v.get<int>();
}

std::string get_string(const json& v, const std::string& context) {
  if (!v.is_string()) throw SchemaError(context + ": expected a string");
  return v.get<std::string>();
}

Vec3 get_vec3(const json& v, const std::string& context) {
  if (!v.is_array() || v.size() != 3)
    throw SchemaError(context + ": expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = get_number(v[i], context);
  return out;
}

RigidTransform get_transform(const json& v, const std::string& context) {
  check_keys(v, {"translation", "rotation_axis_angle"}, context);
  RigidTransform t;
  if (v.contains("translation"))
    t.translation = get_vec3(v["translation"], context + ".translation");
  if (v.contains("rotation_axis_angle"))
    t.rotation = so3_exp(
        get_vec3(v["rotation_axis_angle"], context + ".rotation_axis_angle"));
  return t;
}

// Round to 12 significant digits (the placement file contract).
double sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::strtod(buf, nullptr);
}

json transform_to_json(const RigidTransform& t) {
  const Vec3 aa = so3_log(t.rotation);
  json out;
  out["rotation_axis_angle"] = {sig12(aa.x()), sig12(aa.y()), sig12(aa.z())};
  out["translation"] = {sig12(t.translation.x()), sig12(t.translation.y()),
                        sig12(t.translation.z())};
  return out;
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

PoseVector parse_pose(const json& v, const std::string& context) {
  if (!v.is_object()) throw SchemaError(context + ": expected a pose object");
  PoseVector pose;
  for (const auto& [part, vals] : v.items()) {
    if (!vals.is_array())
      throw SchemaError(context + "." + part + ": expected an array");
    std::vector<double> theta;
    for (const auto& x : vals)
      theta.push_back(get_number(x, context + "." + part));
    pose[part] = std::move(theta);
  }
  return pose;
}

std::vector<PoseVector> parse_poses(const json& v, const std::string& context) {
  if (!v.is_array()) throw SchemaError(context + ": expected an array");
  std::vector<PoseVector> poses;
  for (std::size_t i = 0; i < v.size(); ++i)
    poses.push_back(parse_pose(v[i], context + "[" + std::to_string(i) + "]"));
  return poses;
}

ObjectiveConfig parse_objective(const json& v, const std::string& context) {
  if (!v.is_object()) throw SchemaError(context + ": expected an object");
  ObjectiveConfig cfg;
  const std::string kind = get_string(require(v, "kind", context), context);

  if (kind == "reach") {
    check_keys(v, {"kind", "targets", "max_iters", "poses"}, context);
    const json& targets = require(v, "targets", context);
    if (!targets.is_array() || targets.empty())
      throw SchemaError(context + ".targets: expected a nonempty array");
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const std::string tctx = context + ".targets[" + std::to_string(i) + "]";
      const json& t = targets[i];
      check_keys(t, {"part", "effector_point", "target", "angular_target"},
                 tctx);
      ReachTarget target;
      target.part_id = get_string(require(t, "part", tctx), tctx + ".part");
      target.effector_point =
          get_vec3(require(t, "effector_point", tctx), tctx);
      target.target = get_vec3(require(t, "target", tctx), tctx);
      if (t.contains("angular_target")) {
        const json& a = t["angular_target"];
        check_keys(a, {"axis", "local_axis", "max_deviation_deg"},
                   tctx + ".angular_target");
        AngularTarget ang;
        ang.axis = get_vec3(require(a, "axis", tctx), tctx).normalized();
        if (a.contains("local_axis"))
          ang.local_axis = get_vec3(a["local_axis"], tctx).normalized();
        if (a.contains("max_deviation_deg"))
          ang.max_deviation_deg = get_number(a["max_deviation_deg"], tctx);
        if (ang.max_deviation_deg < 0.0 || ang.max_deviation_deg > 180.0)
          throw SchemaError(tctx + ": max_deviation_deg outside (0, 180]");
        target.angular_target = ang;
      }
      cfg.targets.push_back(std::move(target));
    }
    if (v.contains("max_iters"))
      cfg.ik.max_iters = get_int(v["max_iters"], context + ".max_iters");
    cfg.kind = ObjectiveConfig::Kind::Reach;
  } else if (kind == "pack") {
    check_keys(v, {"kind", "box_center", "box_half_extent",
                   "penetration_samples", "poses"},
               context);
    cfg.pack.box_center = get_vec3(require(v, "box_center", context), context);
    cfg.pack.box_half_extent =
        get_number(require(v, "box_half_extent", context), context);
    if (cfg.pack.box_half_extent <= 0.0)
      throw SchemaError(context + ": box_half_extent must be > 0");
    if (v.contains("penetration_samples"))
      cfg.collision.surface_samples =
          get_int(v["penetration_samples"], context);
    cfg.kind = ObjectiveConfig::Kind::Pack;
  } else if (kind == "trajectory") {
    check_keys(v, {"kind", "part", "effector_point", "waypoints", "max_iters",
                   "poses"},
               context);
    cfg.trajectory.part_id =
        get_string(require(v, "part", context), context + ".part");
    cfg.trajectory.effector_point =
        get_vec3(require(v, "effector_point", context), context);
    const json& wps = require(v, "waypoints", context);
    if (!wps.is_array() || wps.size() < 2)
      throw SchemaError(context + ".waypoints: need at least 2 waypoints");
    for (const auto& wp : wps) {
      check_keys(wp, {"t", "point"}, context + ".waypoints[]");
      cfg.trajectory.waypoints.emplace_back(
          get_number(require(wp, "t", context), context),
          get_vec3(require(wp, "point", context), context));
    }
    if (v.contains("max_iters"))
      cfg.ik.max_iters = get_int(v["max_iters"], context + ".max_iters");
    cfg.kind = ObjectiveConfig::Kind::Trajectory;
  } else if (kind == "collision") {
    check_keys(v, {"kind", "penetration_samples", "poses"}, context);
    if (v.contains("penetration_samples"))
      cfg.collision.surface_samples =
          get_int(v["penetration_samples"], context);
    cfg.kind = ObjectiveConfig::Kind::Collision;
  } else if (kind == "combine") {
    check_keys(v, {"kind", "terms", "poses"}, context);
    const json& terms = require(v, "terms", context);
    if (!terms.is_array() || terms.empty())
      throw SchemaError(context + ".terms: expected a nonempty array");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const std::string tctx = context + ".terms[" + std::to_string(i) + "]";
      check_keys(terms[i], {"weight", "objective"}, tctx);
      const double weight =
          get_number(require(terms[i], "weight", tctx), tctx + ".weight");
      if (weight <= 0.0) throw SchemaError(tctx + ": weight must be > 0");
      cfg.terms.emplace_back(
          parse_objective(require(terms[i], "objective", tctx),
                          tctx + ".objective"),
          weight);
    }
    cfg.kind = ObjectiveConfig::Kind::Combine;
  } else {
    throw SchemaError(context + ": unknown objective kind '" + kind + "'");
  }

  if (v.contains("poses"))
    cfg.poses = parse_poses(v["poses"], context + ".poses");
  return cfg;
}

JointKind parse_joint_kind(const std::string& s, const std::string& context) {
  if (s == "revolute") return JointKind::Revolute;
  if (s == "prismatic") return JointKind::Prismatic;
  if (s == "cylindrical") return JointKind::Cylindrical;
  if (s == "cartesian") return JointKind::Cartesian;
  throw SchemaError(context + ": unknown joint kind '" + s + "'");
}

}  // namespace

SceneConfig load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!doc.is_object()) throw SchemaError(path + ": config must be an object");

  SceneConfig config;
  config.config_echo = doc.dump(2);
  const fs::path base_dir = fs::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base_dir / fp).string();
  };

  check_keys(doc,
             {"version", "seed", "threads", "parts", "pose", "solver",
              "sampler", "objective", "priors", "metrics"},
             "config");
  config.version = get_int(require(doc, "version", "config"), "version");
  if (config.version != 1)
    throw SchemaError("config: unsupported version " +
                      std::to_string(config.version));
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_integer())
      throw SchemaError("config.seed: expected an integer");
    config.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("threads")) {
    config.threads = get_int(doc["threads"], "config.threads");
    if (config.threads < 1)
      throw SchemaError("config.threads: must be >= 1");
  }

  const json& parts = require(doc, "parts", "config");
  if (!parts.is_array() || parts.empty())
    throw SchemaError("config.parts: expected a nonempty array");
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const std::string ctx = "config.parts[" + std::to_string(i) + "]";
    const json& p = parts[i];
    check_keys(p,
               {"id", "mesh", "parent", "joint", "source_parent_mesh",
                "initial_placement"},
               ctx);
    KinematicPart part;
    part.id = get_string(require(p, "id", ctx), ctx + ".id");
    if (config.tree.parts.count(part.id))
      throw SchemaError(ctx + ": duplicate part id '" + part.id + "'");
    const std::string mesh_path =
        resolve(get_string(require(p, "mesh", ctx), ctx + ".mesh"));
    part.mesh = load_obj(mesh_path);
    try {
      validate_mesh(part.mesh);
    } catch (const InvalidMesh& e) {
      throw InvalidMesh(ctx + " (" + mesh_path + "): " + e.what());
    }
    if (p.contains("parent"))
      part.parent_id = get_string(p["parent"], ctx + ".parent");
    if (p.contains("joint")) {
      const json& j = p["joint"];
      const std::string jctx = ctx + ".joint";
      check_keys(j, {"kind", "axis", "origin", "limits"}, jctx);
      JointSpec joint;
      joint.kind = parse_joint_kind(
          get_string(require(j, "kind", jctx), jctx + ".kind"), jctx);
      if (j.contains("axis"))
        joint.axis = get_vec3(j["axis"], jctx + ".axis").normalized();
      else if (joint.kind != JointKind::Cartesian)
        throw SchemaError(jctx + ": missing required field 'axis'");
      if (j.contains("origin"))
        joint.origin = get_transform(j["origin"], jctx + ".origin");
      const json& limits = require(j, "limits", jctx);
      if (!limits.is_array())
        throw SchemaError(jctx + ".limits: expected an array of [lo, hi]");
      for (const auto& lim : limits) {
        if (!lim.is_array() || lim.size() != 2)
          throw SchemaError(jctx + ".limits: entries must be [lo, hi]");
        joint.limits.push_back({get_number(lim[0], jctx),
                                get_number(lim[1], jctx)});
      }
      try {
        validate_joint(joint);
      } catch (const Error& e) {
        throw SchemaError(jctx + ": " + e.what());
      }
      part.joint = joint;
    }
    if (p.contains("parent") != p.contains("joint"))
      throw SchemaError(ctx + ": 'parent' and 'joint' must come together");
    if (p.contains("source_parent_mesh"))
      part.source_parent_mesh = load_obj(
          resolve(get_string(p["source_parent_mesh"], ctx)));
    if (p.contains("initial_placement"))
      part.initial_placement =
          get_transform(p["initial_placement"], ctx + ".initial_placement");
    config.tree.parts.emplace(part.id, std::move(part));
  }
  for (const auto& [id, part] : config.tree.parts)
    if (!part.parent_id) config.tree.root_id = id;

  const TreeDiagnostics diag = validate_tree(config.tree);
  if (!diag.ok) {
    std::string msg = "config.parts: invalid kinematic tree:";
    for (const auto& issue : diag.issues) msg += "\n  - " + issue;
    throw SchemaError(msg);
  }

  Aabb scene_box;
  for (const auto& [id, part] : config.tree.parts)
    scene_box.expand(aabb(part.mesh));
  config.scene_diagonal = scene_box.diagonal();

  if (doc.contains("pose")) {
    check_keys(doc["pose"], {"snapshots_per_dof"}, "config.pose");
    if (doc["pose"].contains("snapshots_per_dof")) {
      config.snapshots_per_dof =
          get_int(doc["pose"]["snapshots_per_dof"], "config.pose");
      if (config.snapshots_per_dof < 2)
        throw SchemaError("config.pose.snapshots_per_dof: must be >= 2");
    }
  }

  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    check_keys(s,
               {"rho", "max_outer_iters", "irls_iters", "welsch_nu",
                "convergence_tol"},
               "config.solver");
    if (s.contains("rho")) config.solver.rho = get_number(s["rho"], "solver.rho");
    if (s.contains("max_outer_iters"))
      config.solver.max_outer_iters =
          get_int(s["max_outer_iters"], "solver.max_outer_iters");
    if (s.contains("irls_iters"))
      config.solver.irls_iters = get_int(s["irls_iters"], "solver.irls_iters");
    if (s.contains("welsch_nu"))
      config.solver.welsch_nu = get_number(s["welsch_nu"], "solver.welsch_nu");
    if (s.contains("convergence_tol"))
      config.solver.convergence_tol =
          get_number(s["convergence_tol"], "solver.convergence_tol");
    if (config.solver.rho <= 0.0 || config.solver.welsch_nu <= 0.0)
      throw SchemaError("config.solver: rho and welsch_nu must be > 0");
  }

  config.sampler.trans_noise = 0.1 * config.scene_diagonal;
  if (doc.contains("sampler")) {
    const json& s = doc["sampler"];
    check_keys(s,
               {"total_steps", "score_samples", "lambda", "alpha_start",
                "alpha_end", "trans_noise", "rot_noise", "inner_refine_iters",
                "checkpoint_interval"},
               "config.sampler");
    if (s.contains("total_steps"))
      config.sampler.total_steps = get_int(s["total_steps"], "sampler");
    if (s.contains("score_samples"))
      config.sampler.score_samples = get_int(s["score_samples"], "sampler");
    if (s.contains("lambda"))
      config.sampler.lambda = get_number(s["lambda"], "sampler.lambda");
    if (s.contains("alpha_start"))
      config.sampler.alpha_start = get_number(s["alpha_start"], "sampler");
    if (s.contains("alpha_end"))
      config.sampler.alpha_end = get_number(s["alpha_end"], "sampler");
    if (s.contains("trans_noise"))
      config.sampler.trans_noise = get_number(s["trans_noise"], "sampler");
    if (s.contains("rot_noise"))
      config.sampler.rot_noise = get_number(s["rot_noise"], "sampler");
    if (s.contains("inner_refine_iters"))
      config.sampler.inner_refine_iters =
          get_int(s["inner_refine_iters"], "sampler");
    if (s.contains("checkpoint_interval"))
      config.sampler.checkpoint_interval =
          get_int(s["checkpoint_interval"], "sampler");
  }
  config.sampler.seed = config.seed;
  config.sampler.threads = config.threads;
  try {
    validate_sampler_config(config.sampler);
  } catch (const ValidationError& e) {
    throw SchemaError(std::string("config.sampler: ") + e.what());
  }

  if (doc.contains("objective"))
    config.objective = parse_objective(doc["objective"], "config.objective");

  if (doc.contains("priors")) {
    const json& pr = doc["priors"];
    check_keys(pr, {"pins", "exemplar_file", "sigma", "assignments"},
               "config.priors");
    if (pr.contains("pins")) {
      if (!pr["pins"].is_array())
        throw SchemaError("config.priors.pins: expected an array");
      for (const auto& pin_json : pr["pins"]) {
        check_keys(pin_json, {"part", "target", "weight"},
                   "config.priors.pins[]");
        PinConstraint pin;
        pin.part_id = get_string(require(pin_json, "part", "priors.pins[]"),
                                 "priors.pins[].part");
        pin.target = get_vec3(require(pin_json, "target", "priors.pins[]"),
                              "priors.pins[].target");
        if (pin_json.contains("weight"))
          pin.weight = get_number(pin_json["weight"], "priors.pins[].weight");
        if (pin.weight <= 0.0)
          throw SchemaError("config.priors.pins[]: weight must be > 0");
        if (!config.tree.parts.count(pin.part_id))
          throw SchemaError("config.priors.pins[]: unknown part '" +
                            pin.part_id + "'");
        config.priors.pins.push_back(pin);
      }
    }
    if (pr.contains("sigma")) {
      config.priors.sigma = get_number(pr["sigma"], "priors.sigma");
      if (config.priors.sigma <= 0.0)
        throw SchemaError("config.priors.sigma: must be > 0");
    }
    if (pr.contains("exemplar_file"))
      config.priors.exemplar_file =
          resolve(get_string(pr["exemplar_file"], "priors.exemplar_file"));
    if (pr.contains("assignments")) {
      if (!pr["assignments"].is_array())
        throw SchemaError("config.priors.assignments: expected an array");
      for (const auto& a : pr["assignments"]) {
        check_keys(a, {"part", "parent_label", "child_label"},
                   "config.priors.assignments[]");
        PriorsConfig::Assignment assign;
        assign.part_id = get_string(require(a, "part", "assignments[]"),
                                    "assignments[].part");
        assign.parent_label =
            get_string(require(a, "parent_label", "assignments[]"),
                       "assignments[].parent_label");
        assign.child_label =
            get_string(require(a, "child_label", "assignments[]"),
                       "assignments[].child_label");
        if (!config.tree.parts.count(assign.part_id))
          throw SchemaError("config.priors.assignments[]: unknown part '" +
                            assign.part_id + "'");
        config.priors.assignments.push_back(assign);
      }
      if (config.priors.exemplar_file.empty())
        throw SchemaError(
            "config.priors: assignments require an exemplar_file");
    }
  }

  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    check_keys(m, {"contact_tol", "voxel_res", "gravity"}, "config.metrics");
    if (m.contains("contact_tol"))
      config.metrics.contact_tol_frac =
          get_number(m["contact_tol"], "metrics.contact_tol");
    if (m.contains("voxel_res"))
      config.metrics.voxel_res = get_int(m["voxel_res"], "metrics.voxel_res");
    if (m.contains("gravity"))
      config.metrics.gravity =
          get_vec3(m["gravity"], "metrics.gravity").normalized();
    if (config.metrics.voxel_res < 16)
      throw SchemaError("config.metrics.voxel_res: must be >= 16");
  }

  return config;
}

Objective build_objective(const ObjectiveConfig& config) {
  switch (config.kind) {
    case ObjectiveConfig::Kind::None:
      return {};
    case ObjectiveConfig::Kind::Reach:
      return reach_objective(config.targets, config.ik);
    case ObjectiveConfig::Kind::Pack:
      return pack_objective(config.pack, config.collision);
    case ObjectiveConfig::Kind::Trajectory:
      return trajectory_objective(config.trajectory, config.ik);
    case ObjectiveConfig::Kind::Collision:
      return collision_objective(config.collision);
    case ObjectiveConfig::Kind::Combine: {
      std::vector<std::pair<Objective, double>> terms;
      for (const auto& [term, weight] : config.terms)
        terms.emplace_back(build_objective(term), weight);
      return combine_objectives(terms);
    }
  }
  return {};
}

SceneModel build_scene_model(const SceneConfig& config) {
  SceneModel model;
  model.tree = &config.tree;
  model.solver = config.solver;
  model.objective = build_objective(config.objective);
  model.objective_pose_set = config.objective.poses;
  model.pins = config.priors.pins;

  if (!config.priors.assignments.empty()) {
    const auto exemplars = load_prior_exemplars(config.priors.exemplar_file);
    for (const auto& assign : config.priors.assignments) {
      model.priors.emplace_back(
          assign.part_id,
          prior_for_labels(exemplars, assign.parent_label, assign.child_label,
                           config.priors.sigma));
    }
  }

  for (const std::string& id : config.tree.topological_order()) {
    const KinematicPart& part = config.tree.part(id);
    if (!part.parent_id || !part.source_parent_mesh) continue;
    const KinematicPart& parent = config.tree.part(*part.parent_id);
    model.attachments.push_back(
        build_problem(part, parent.mesh, config.snapshots_per_dof));
  }
  return model;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string placements_to_json(const PlacementSet& placements) {
  json doc;
  doc["placements"] = json::array();
  for (const auto& [id, transform] : placements) {
    json entry = transform_to_json(transform);
    entry["part_id"] = id;
    doc["placements"].push_back(entry);
  }
  return doc.dump(2) + "\n";
}

PlacementSet placements_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("placements: ") + e.what());
  }
  PlacementSet out;
  for (const auto& entry : require(doc, "placements", "placements")) {
    const std::string id =
        get_string(require(entry, "part_id", "placements[]"), "part_id");
    RigidTransform t;
    t.rotation = so3_exp(get_vec3(require(entry, "rotation_axis_angle",
                                          "placements[]"),
                                  "rotation_axis_angle"));
    t.translation =
        get_vec3(require(entry, "translation", "placements[]"), "translation");
    out[id] = t;
  }
  return out;
}

std::string report_to_json(const RunReport& report) {
  json doc;
  doc["version"] = report.version;
  doc["seed"] = report.seed;
  doc["energies"] = {{"attachment", report.attachment_energy},
                     {"functionality", report.functionality_energy},
                     {"prior", report.prior_energy},
                     {"pin", report.pin_energy}};
  doc["placements"] = json::parse(placements_to_json(report.placements))["placements"];
  json metrics;
  metrics["rooted"] = report.metrics.rooted;
  metrics["stable"] = report.metrics.stable;
  metrics["aor"] = report.metrics.aor;
  metrics["sibling_overlaps"] = json::array();
  for (const auto& pair : report.metrics.sibling_overlaps) {
    metrics["sibling_overlaps"].push_back(
        {{"part_a", pair.part_a},
         {"part_b", pair.part_b},
         {"ratio", pair.ratio},
         {"intersection_volume", pair.intersection_volume}});
  }
  doc["metrics"] = metrics;
  json timings;
  for (const auto& [phase, seconds] : report.timings_sec) timings[phase] = seconds;
  doc["timings_sec"] = timings;
  if (!report.per_part_energy_trace.empty()) {
    json traces;
    for (const auto& [id, trace] : report.per_part_energy_trace)
      traces[id] = trace;
    doc["attachment_energy_traces"] = traces;
  }
  if (!report.config_echo.empty())
    doc["config"] = json::parse(report.config_echo);
  return doc.dump(2) + "\n";
}

std::string trace_to_ndjson(const SamplerTrace& trace) {
  std::ostringstream out;
  char buf[160];
  for (const StepRecord& rec : trace.records) {
    std::snprintf(buf, sizeof(buf),
                  "{\"step\":%d,\"alpha\":%.17g,\"current_energy\":%.17g,"
                  "\"best_energy\":%.17g}\n",
                  rec.step, rec.alpha, rec.current_energy, rec.best_energy);
    out << buf;
  }
  return out.str();
}

MetricsReport scene_metrics(const SceneConfig& config,
                            const PlacementSet& placements) {
  AssembledScene scene;
  scene.tree = &config.tree;
  scene.placements = placements;
  return compute_metrics(scene,
                         config.metrics.contact_tol_frac * config.scene_diagonal,
                         config.metrics.gravity, config.metrics.voxel_res);
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed: " + path.string());
}

struct PhaseTimer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

PlacementSet initial_placements(const KinematicTree& tree) {
  PlacementSet out;
  for (const std::string& id : tree.non_root_ids())
    out[id] = tree.part(id).initial_placement;
  return out;
}

void fill_energies(RunReport& report, const SceneModel& model,
                   const SceneConfig& config) {
  const DensityResult density =
      target_log_density(model, report.placements, config.sampler.lambda, 0);
  report.attachment_energy = density.attachment;
  report.functionality_energy = density.functionality;
  report.prior_energy = density.prior;
  report.pin_energy = density.pin;
}

}  // namespace

RunReport run_attach(const SceneConfig& config, const fs::path& out_dir) {
  for (const std::string& id : config.tree.non_root_ids()) {
    if (!config.tree.part(id).source_parent_mesh)
      throw ValidationError("run_attach: part '" + id +
                            "' has no source_parent_mesh");
  }
  fs::create_directories(out_dir);

  RunReport report;
  report.seed = config.seed;
  report.config_echo = config.config_echo;

  PhaseTimer total;
  PhaseTimer build_timer;
  const SceneModel model = build_scene_model(config);
  report.timings_sec.emplace_back("build", build_timer.elapsed());

  PhaseTimer solve_timer;
  report.placements = initial_placements(config.tree);
  for (const AttachmentProblem& problem : model.attachments) {
    const RigidTransform parent_placement =
        problem.parent_part_id.empty() ||
                problem.parent_part_id == config.tree.root_id
            ? RigidTransform::identity()
            : report.placements.at(problem.parent_part_id);
    const RigidTransform relative =
        parent_placement.inverse() * report.placements.at(problem.part_id);
    const AttachmentResult result =
        solve_attachment(problem, relative, config.solver);
    report.placements[problem.part_id] = parent_placement * result.placement;
    report.per_part_energy_trace[problem.part_id] = result.energy_trace;
  }
  report.timings_sec.emplace_back("solve", solve_timer.elapsed());

  PhaseTimer metrics_timer;
  fill_energies(report, model, config);
  report.metrics = scene_metrics(config, report.placements);
  report.timings_sec.emplace_back("metrics", metrics_timer.elapsed());
  report.timings_sec.emplace_back("total", total.elapsed());

  write_file(out_dir / "placements.json", placements_to_json(report.placements));
  write_file(out_dir / "report.json", report_to_json(report));
  return report;
}

RunReport run_full(const SceneConfig& config, const fs::path& out_dir) {
  if (config.objective.kind == ObjectiveConfig::Kind::None)
    throw ValidationError(
        "run_full: config has no objective block; use run_attach for "
        "attachment-only solves");
  fs::create_directories(out_dir);

  RunReport report;
  report.seed = config.seed;
  report.config_echo = config.config_echo;

  PhaseTimer total;
  PhaseTimer build_timer;
  const SceneModel model = build_scene_model(config);
  report.timings_sec.emplace_back("build", build_timer.elapsed());

  PhaseTimer sample_timer;
  const SamplerResult result = run_sampler(model, config.sampler);
  report.placements = result.best;
  report.timings_sec.emplace_back("sample", sample_timer.elapsed());

  PhaseTimer metrics_timer;
  fill_energies(report, model, config);
  report.metrics = scene_metrics(config, report.placements);
  report.timings_sec.emplace_back("metrics", metrics_timer.elapsed());

  PhaseTimer export_timer;
  write_file(out_dir / "placements.json", placements_to_json(report.placements));
  write_file(out_dir / "trace.ndjson", trace_to_ndjson(result.trace));
  for (const auto& [step, checkpoint] : result.trace.checkpoints) {
    char name[64];
    std::snprintf(name, sizeof(name), "placements_step_%04d.json", step);
    write_file(out_dir / name, placements_to_json(checkpoint));
  }
  const auto poses = sample_pose_grid(config.tree, config.snapshots_per_dof);
  export_poses(config.tree, report.placements, poses, out_dir / "poses");
  report.timings_sec.emplace_back("export", export_timer.elapsed());
  report.timings_sec.emplace_back("total", total.elapsed());

  write_file(out_dir / "report.json", report_to_json(report));
  return report;
}

std::vector<std::string> export_poses(const KinematicTree& tree,
                                      const PlacementSet& placements,
                                      const std::vector<PoseVector>& pose_list,
                                      const fs::path& out_dir) {
  fs::create_directories(out_dir);
  std::vector<std::string> files;
  json manifest;
  manifest["files"] = json::array();

  for (std::size_t p = 0; p < pose_list.size(); ++p) {
    const auto world = assembled_world(tree, placements, pose_list[p]);
    char name[64];
    std::snprintf(name, sizeof(name), "pose_%04zu.obj", p);
    std::ofstream out(out_dir / name);
    if (!out) throw IoError("cannot write " + (out_dir / name).string());
    int vertex_base = 0;
    for (const std::string& id : tree.topological_order()) {
      const TriMesh placed = tree.part(id).mesh.transformed(world.at(id));
      out << "o " << id << "\n";
      char buf[96];
      for (const Vec3& v : placed.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x(), v.y(),
                      v.z());
        out << buf;
      }
      for (const auto& f : placed.faces)
        out << "f " << f[0] + 1 + vertex_base << " " << f[1] + 1 + vertex_base
            << " " << f[2] + 1 + vertex_base << "\n";
      vertex_base += static_cast<int>(placed.vertices.size());
    }
    if (!out) throw IoError("write failed: " + (out_dir / name).string());
    files.push_back(name);

    json pose_json;
    for (const auto& [id, vals] : pose_list[p]) pose_json[id] = vals;
    manifest["files"].push_back({{"file", name}, {"pose", pose_json}});
  }
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return files;
}

}  // namespace kitbash
