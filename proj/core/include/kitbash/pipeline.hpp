// Scene-config ingestion, end-to-end runs (attachment-only or full annealed
// sampling), artifact export, and metrics reporting.
#pragma once

#include <filesystem>

#include "kitbash/langevin.hpp"
#include "kitbash/metrics.hpp"

namespace kitbash {

inline constexpr const char* kVersion = "0.1.0";

struct ObjectiveConfig {
  enum class Kind { None, Reach, Pack, Trajectory, Collision, Combine };
  Kind kind = Kind::None;
  std::vector<ReachTarget> targets;  // Reach
  PackSpec pack;                     // Pack
  Trajectory trajectory;             // Trajectory
  CollisionParams collision;         // Pack / Collision knobs
  IkOptions ik;                      // Reach / Trajectory knobs
  std::vector<std::pair<ObjectiveConfig, double>> terms;  // Combine
  std::vector<PoseVector> poses;     // evaluated pose set (empty: rest)
};

struct PriorsConfig {
  std::vector<PinConstraint> pins;
  std::string exemplar_file;  // resolved absolute path; empty when unused
  double sigma = 0.3;
  struct Assignment {
    std::string part_id;
    std::string parent_label;
    std::string child_label;
  };
  std::vector<Assignment> assignments;
};

struct MetricsConfig {
  double contact_tol_frac = 0.01;  // fraction of the scene diagonal
  int voxel_res = 64;
  Vec3 gravity = -Vec3::UnitZ();
};

struct SceneConfig {
  int version = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  KinematicTree tree;
  int snapshots_per_dof = 5;
  SolverConfig solver;
  SamplerConfig sampler;
  ObjectiveConfig objective;
  PriorsConfig priors;
  MetricsConfig metrics;
  std::string config_echo;  // the document as loaded
  double scene_diagonal = 0.0;
};

// Parse + schema-validate (unknown fields rejected) + load meshes + validate
// the tree. Relative paths resolve against the config file's directory.
SceneConfig load_scene(const std::string& path);

// The density model the runs operate on (attachment problems in
// parent-before-child order, objective, priors).
SceneModel build_scene_model(const SceneConfig& config);

Objective build_objective(const ObjectiveConfig& config);

struct RunReport {
  PlacementSet placements;
  double attachment_energy = 0.0;
  double functionality_energy = 0.0;
  double prior_energy = 0.0;
  double pin_energy = 0.0;
  MetricsReport metrics;
  std::vector<std::pair<std::string, double>> timings_sec;
  std::string config_echo;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  std::map<std::string, std::vector<double>> per_part_energy_trace;
};

// Per-part attachment solves from the initial placements (parent before
// child). Writes placements.json and report.json under out_dir.
RunReport run_attach(const SceneConfig& config,
                     const std::filesystem::path& out_dir);

// Full annealed run with the configured objective and priors. Writes
// placements.json, report.json, trace.ndjson, checkpoint placements, and
// pose-sequence OBJ exports under out_dir.
RunReport run_full(const SceneConfig& config,
                   const std::filesystem::path& out_dir);

// One OBJ per pose with every part transformed (grouped by part name), plus
// manifest.json listing files and pose parameters. Returns the file names.
std::vector<std::string> export_poses(const KinematicTree& tree,
                                      const PlacementSet& placements,
                                      const std::vector<PoseVector>& pose_list,
                                      const std::filesystem::path& out_dir);

// Serialization used by the CLI and the runs; 12 significant digits on
// placement values, bit-stable across runs.
std::string placements_to_json(const PlacementSet& placements);
PlacementSet placements_from_json(const std::string& text);
std::string report_to_json(const RunReport& report);
std::string trace_to_ndjson(const SamplerTrace& trace);

MetricsReport scene_metrics(const SceneConfig& config,
                            const PlacementSet& placements);

}  // namespace kitbash
