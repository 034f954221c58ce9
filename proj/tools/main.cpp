// Command-line front end: validate, attach, solve, metrics, export.
#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kitbash/pipeline.hpp"

namespace fs = std::filesystem;
using namespace kitbash;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::string placements_path;
  int snapshots = 0;
  bool seed_set = false;
  std::uint64_t seed = 0;
  int threads = 0;
};

SceneConfig load_with_overrides(const GlobalArgs& args) {
  SceneConfig config = load_scene(args.config_path);
  if (args.seed_set) {
    config.seed = args.seed;
    config.sampler.seed = args.seed;
  }
  if (args.threads > 0) {
    config.threads = args.threads;
    config.sampler.threads = args.threads;
  }
  return config;
}

PlacementSet placements_for(const SceneConfig& config,
                            const std::string& path) {
  if (path.empty()) {
    PlacementSet out;
    for (const std::string& id : config.tree.non_root_ids())
      out[id] = config.tree.part(id).initial_placement;
    return out;
  }
  std::ifstream in(path);
  if (!in) throw MissingFile("cannot open placements file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return placements_from_json(buffer.str());
}

void write_text(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".")
                                                    : path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Assemble articulated parts into functional objects"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalArgs args;
  app.add_option("--config", args.config_path, "Scene config JSON")
      ->required();
  app.add_option("--out", args.out_dir, "Output directory");
  app.add_flag_callback("--version", [] {
    std::cout << kVersion << "\n";
    std::exit(0);
  });
  auto* seed_opt = app.add_option("--seed", args.seed,
                                  "Override the config seed");
  app.add_option("--threads", args.threads,
                 "Override the config thread count");

  auto* validate_cmd =
      app.add_subcommand("validate", "Parse and validate a scene config");
  auto* attach_cmd = app.add_subcommand(
      "attach", "Per-part attachment solves from the initial placements");
  auto* solve_cmd = app.add_subcommand(
      "solve", "Full annealed run with the configured objective");
  auto* metrics_cmd =
      app.add_subcommand("metrics", "Metrics report for given placements");
  metrics_cmd->add_option("--placements", args.placements_path,
                          "Placement JSON (defaults to initial placements)");
  auto* export_cmd =
      app.add_subcommand("export", "Pose-sequence OBJ export");
  export_cmd->add_option("--placements", args.placements_path,
                         "Placement JSON (defaults to initial placements)");
  export_cmd->add_option("--snapshots", args.snapshots,
                         "Snapshots per DoF (defaults to the config value)");

  CLI11_PARSE(app, argc, argv);
  args.seed_set = seed_opt->count() > 0;

  try {
    const SceneConfig config = load_with_overrides(args);

    if (validate_cmd->parsed()) {
      std::cout << "ok: " << config.tree.parts.size() << " parts, root '"
                << config.tree.root_id << "'\n";
      return 0;
    }
    if (attach_cmd->parsed()) {
      const RunReport report = run_attach(config, args.out_dir);
      std::cout << "attachment energy " << report.attachment_energy
                << ", report written to " << args.out_dir << "\n";
      return 0;
    }
    if (solve_cmd->parsed()) {
      const RunReport report = run_full(config, args.out_dir);
      std::cout << "energies: attachment " << report.attachment_energy
                << ", functionality " << report.functionality_energy
                << "; report written to " << args.out_dir << "\n";
      return 0;
    }
    if (metrics_cmd->parsed()) {
      const PlacementSet placements =
          placements_for(config, args.placements_path);
      const MetricsReport metrics = scene_metrics(config, placements);
      RunReport report;
      report.seed = config.seed;
      report.placements = placements;
      report.metrics = metrics;
      write_text(fs::path(args.out_dir) / "metrics.json",
                 report_to_json(report));
      std::cout << "rooted " << (metrics.rooted ? "yes" : "no") << ", stable "
                << (metrics.stable ? "yes" : "no") << ", aor " << metrics.aor
                << "\n";
      return 0;
    }
    if (export_cmd->parsed()) {
      const PlacementSet placements =
          placements_for(config, args.placements_path);
      const int snaps =
          args.snapshots > 0 ? args.snapshots : config.snapshots_per_dof;
      const auto poses = sample_pose_grid(config.tree, snaps);
      const auto files = export_poses(config.tree, placements, poses,
                                      fs::path(args.out_dir) / "poses");
      std::cout << files.size() << " pose files written to " << args.out_dir
                << "/poses\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
