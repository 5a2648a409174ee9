#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "certmap/pipeline.hpp"
#include "certmap/voxel_grid.hpp"

namespace {

// Exit codes: 0 ok, 1 usage, 2 scenario/run error, 3 certification violation.
enum ExitCode { kOk = 0, kUsage = 1, kScenarioError = 2, kViolation = 3 };

int run_command(const certmap::RunConfig& cfg) {
  const certmap::RunSummary summary = certmap::run_scenario(cfg);
  std::printf("frames: %ld\n", summary.frames);
  std::printf("rms_rre: %.6g  rms_rte: %.6g m\n", summary.rms_rre, summary.rms_rte);
  std::printf("rms_epsilon_r: %.6g  rms_epsilon_t: %.6g m\n", summary.rms_epsilon_r,
              summary.rms_epsilon_t);
  std::printf("bound ratios: rotation %.3g  translation %.3g\n", summary.rotation_bound_ratio,
              summary.translation_bound_ratio);
  std::printf("mean timings (ms): registration %.3f  integrate %.3f  deflate %.3f  propagate %.3f\n",
              summary.mean_registration_ms, summary.mean_integrate_ms, summary.mean_deflate_ms,
              summary.mean_propagate_ms);
  std::printf("violations: %ld  bound_breaches: %ld\n", summary.total_violations,
              summary.bound_breaches);
  if (cfg.oracle && summary.total_violations > 0) return kViolation;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified frame-to-frame registration and mapping"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", corr_file, snapshot_path;
  std::uint64_t seed = 0;
  bool have_seed = false, oracle = false;
  double fraction = 0.0;
  int iterations = 0;
  double slice_z = 0.0;

  CLI::App* run = app.add_subcommand("run", "simulate, register and map a scenario");
  run->add_option("scenario", scenario_path, "scenario YAML file")->required();
  run->add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    have_seed = true;
  });
  run->add_flag("--oracle", oracle, "check estimates and the map against ground truth");
  run->add_option("--out", out_dir, "output directory (trace.csv, summary.json, snapshot.grid)");
  run->add_option("--fraction", fraction, "pair graph fraction override");
  run->add_option("--iterations", iterations, "bound sampling iterations override");
  run->add_option("--correspondence-file", corr_file,
                  "register matches from a file instead of simulating (registration only)");

  CLI::App* fig3 = app.add_subcommand("fig3", "bound tightness vs sampling iterations (CSV)");
  fig3->add_option("scenario", scenario_path, "scenario YAML file")->required();
  fig3->add_option("--out", out_dir, "output directory");

  CLI::App* fig5 = app.add_subcommand("fig5", "accuracy/runtime vs graph fraction (CSV)");
  fig5->add_option("scenario", scenario_path, "scenario YAML file")->required();
  fig5->add_option("--out", out_dir, "output directory");

  CLI::App* slice = app.add_subcommand("slice", "export a z slice of a grid snapshot as CSV");
  slice->add_option("snapshot", snapshot_path, "snapshot.grid file")->required();
  slice->add_option("--z", slice_z, "slice height in meters")->required();
  slice->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    std::filesystem::create_directories(out_dir);
    if (run->parsed()) {
      certmap::RunConfig cfg;
      cfg.scenario_path = scenario_path;
      if (have_seed) cfg.seed_override = seed;
      cfg.oracle = oracle;
      cfg.out_dir = out_dir;
      if (fraction > 0.0) cfg.fraction_override = fraction;
      if (iterations > 0) cfg.iterations_override = iterations;
      if (!corr_file.empty()) cfg.correspondence_file = corr_file;
      return run_command(cfg);
    }
    if (fig3->parsed()) {
      const certmap::Scenario sc = certmap::load_scenario(scenario_path);
      certmap::export_fig3_data(sc, out_dir + "/fig3.csv");
      std::printf("wrote %s/fig3.csv\n", out_dir.c_str());
      return kOk;
    }
    if (fig5->parsed()) {
      const certmap::Scenario sc = certmap::load_scenario(scenario_path);
      certmap::export_fig5_data(sc, out_dir + "/fig5.csv");
      std::printf("wrote %s/fig5.csv\n", out_dir.c_str());
      return kOk;
    }
    if (slice->parsed()) {
      const certmap::VoxelGrid grid = certmap::load_grid(snapshot_path);
      char name[64];
      std::snprintf(name, sizeof(name), "/slice_z%.3f.csv", slice_z);
      certmap::write_z_slice_csv(grid, slice_z, out_dir + name);
      std::printf("wrote %s%s\n", out_dir.c_str(), name);
      return kOk;
    }
  } catch (const certmap::Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", certmap::to_string(e.code()), e.what());
    return kScenarioError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kScenarioError;
  }
  return kUsage;
}
