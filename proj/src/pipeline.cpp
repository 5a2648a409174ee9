#include "certmap/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "certmap/cesdf.hpp"
#include "certmap/log.hpp"
#include "certmap/rng.hpp"

namespace certmap {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

// Seed streams fanned out of the scenario master seed.
enum : std::uint64_t { kStreamCorrespondences = 1, kStreamRegistration = 2, kStreamTrials = 3 };

double rms(double sum_sq, long n) { return n > 0 ? std::sqrt(sum_sq / n) : 0.0; }

long count_violations(const VoxelGrid& grid, const Scene& scene,
                      const RotoTranslation& map_to_inertial) {
  const double margin = 0.5 * std::sqrt(3.0) * grid.resolution;
  const Eigen::Matrix3d r = map_to_inertial.rotation.matrix();
  const Eigen::Vector3d t = map_to_inertial.translation;
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();

  long violations = 0;
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static) reduction(+ : violations)
#endif
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const std::int64_t i = grid.index(x, y, z);
        if (!grid.observed[static_cast<size_t>(i)]) continue;
        const float e = grid.esdf[static_cast<size_t>(i)];
        if (!std::isfinite(e)) continue;
        const double certified =
            static_cast<double>(e) - grid.correction[static_cast<size_t>(i)] - margin;
        const double truth = scene_sdf(scene, r * grid.center(x, y, z) + t);
        if (certified > truth + 1e-9) ++violations;
      }
    }
  }
  return violations;
}

void write_traces(const std::string& out_dir, const std::vector<FrameTrace>& traces) {
  const std::string trace_path = out_dir + "/trace.csv";
  std::FILE* f = std::fopen(trace_path.c_str(), "w");
  if (!f) raise(Errc::io_error, "cannot write " + trace_path);
  std::fprintf(f, "k,rre,rte,epsilon_r,epsilon_t,converged,violations\n");
  for (const FrameTrace& tr : traces) {
    std::fprintf(f, "%ld,%.17g,%.17g,%.17g,%.17g,%d,%ld\n", tr.k, tr.rre, tr.rte, tr.epsilon_r,
                 tr.epsilon_t, tr.converged ? 1 : 0, tr.violation_count);
  }
  std::fclose(f);

  const std::string timing_path = out_dir + "/timings.csv";
  f = std::fopen(timing_path.c_str(), "w");
  if (!f) raise(Errc::io_error, "cannot write " + timing_path);
  std::fprintf(f, "k,registration_ms,integrate_ms,deflate_ms,propagate_ms\n");
  for (const FrameTrace& tr : traces) {
    std::fprintf(f, "%ld,%.6g,%.6g,%.6g,%.6g\n", tr.k, tr.registration_ms, tr.integrate_ms,
                 tr.deflate_ms, tr.propagate_ms);
  }
  std::fclose(f);
}

void write_summary_json(const std::string& path, const RunSummary& s, const Scenario& sc) {
  nlohmann::json j;
  j["scenario"] = sc.name;
  j["frames"] = s.frames;
  j["rms_rre"] = s.rms_rre;
  j["rms_rte"] = s.rms_rte;
  j["rms_epsilon_r"] = s.rms_epsilon_r;
  j["rms_epsilon_t"] = s.rms_epsilon_t;
  j["rotation_bound_ratio"] = s.rotation_bound_ratio;
  j["translation_bound_ratio"] = s.translation_bound_ratio;
  j["total_violations"] = s.total_violations;
  j["bound_breaches"] = s.bound_breaches;
  j["mean_registration_ms"] = s.mean_registration_ms;
  j["mean_integrate_ms"] = s.mean_integrate_ms;
  j["mean_deflate_ms"] = s.mean_deflate_ms;
  j["mean_propagate_ms"] = s.mean_propagate_ms;
  std::ofstream out(path);
  if (!out) raise(Errc::io_error, "cannot write " + path);
  out << j.dump(2) << "\n";
}

void finalize_summary(RunSummary& s) {
  double sum_rre = 0, sum_rte = 0, sum_er = 0, sum_et = 0;
  double sum_reg = 0, sum_int = 0, sum_def = 0, sum_prop = 0;
  for (const FrameTrace& tr : s.traces) {
    sum_rre += tr.rre * tr.rre;
    sum_rte += tr.rte * tr.rte;
    sum_er += tr.epsilon_r * tr.epsilon_r;
    sum_et += tr.epsilon_t * tr.epsilon_t;
    sum_reg += tr.registration_ms;
    sum_int += tr.integrate_ms;
    sum_def += tr.deflate_ms;
    sum_prop += tr.propagate_ms;
    s.total_violations += tr.violation_count;
  }
  const long n = static_cast<long>(s.traces.size());
  s.frames = n;
  s.rms_rre = rms(sum_rre, n);
  s.rms_rte = rms(sum_rte, n);
  s.rms_epsilon_r = rms(sum_er, n);
  s.rms_epsilon_t = rms(sum_et, n);
  s.rotation_bound_ratio = s.rms_rre > 0 ? s.rms_epsilon_r / s.rms_rre : 0.0;
  s.translation_bound_ratio = s.rms_rte > 0 ? s.rms_epsilon_t / s.rms_rte : 0.0;
  if (n > 0) {
    s.mean_registration_ms = sum_reg / n;
    s.mean_integrate_ms = sum_int / n;
    s.mean_deflate_ms = sum_def / n;
    s.mean_propagate_ms = sum_prop / n;
  }
}

RunSummary run_correspondence_file(const RunConfig& cfg, const Scenario& sc,
                                   std::uint64_t master_seed) {
  const CorrespondenceSet c = load_correspondences(*cfg.correspondence_file);
  const auto t0 = clock_type::now();
  const RegistrationResult reg =
      register_frames(c, sc.graph_fraction, sc.bound_iterations, sc.gnc,
                      derive_seed(master_seed, kStreamRegistration, 0));
  FrameTrace tr;
  tr.k = 0;
  tr.rre = std::numeric_limits<double>::quiet_NaN();  // no ground truth available
  tr.rte = std::numeric_limits<double>::quiet_NaN();
  tr.epsilon_r = reg.epsilon_r;
  tr.epsilon_t = reg.epsilon_t;
  tr.registration_ms = ms_since(t0);
  tr.converged = reg.converged;

  const Eigen::Matrix3d& r = reg.rotation_estimate.matrix();
  logf(LogLevel::info, "registered %d correspondences from %s", c.size(),
       cfg.correspondence_file->c_str());
  std::printf("rotation:\n");
  for (int row = 0; row < 3; ++row) {
    std::printf("  %+.9f %+.9f %+.9f\n", r(row, 0), r(row, 1), r(row, 2));
  }
  std::printf("translation: %+.9f %+.9f %+.9f\n", reg.translation_estimate.x(),
              reg.translation_estimate.y(), reg.translation_estimate.z());
  std::printf("epsilon_r: %.9g\nepsilon_t: %.9g\nconverged: %d\n", reg.epsilon_r, reg.epsilon_t,
              reg.converged ? 1 : 0);

  RunSummary summary;
  summary.traces.push_back(tr);
  finalize_summary(summary);
  // NaN errors poison the RMS fields; zero them for the report.
  summary.rms_rre = summary.rms_rte = 0.0;
  summary.rotation_bound_ratio = summary.translation_bound_ratio = 0.0;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_traces(cfg.out_dir, summary.traces);
    write_summary_json(cfg.out_dir + "/summary.json", summary, sc);
  }
  return summary;
}

}  // namespace

RunSummary run_scenario(const RunConfig& cfg) {
  Scenario sc = load_scenario(cfg.scenario_path);
  if (cfg.fraction_override) sc.graph_fraction = *cfg.fraction_override;
  if (cfg.iterations_override) sc.bound_iterations = *cfg.iterations_override;
  sc.validate();
  const std::uint64_t master_seed = cfg.seed_override.value_or(sc.seed);

  if (cfg.correspondence_file) return run_correspondence_file(cfg, sc, master_seed);

  VoxelGrid grid(sc.grid_origin, sc.grid_resolution, sc.grid_dims);
  MappingState state;
  state.esdf_period_frames =
      std::max(1, static_cast<int>(std::llround(sc.esdf_period * sc.frame_rate)));
  state.deflation_enabled = sc.deflation;

  const long num_frames = std::max<long>(1, std::llround(sc.duration * sc.frame_rate));
  RunSummary summary;
  summary.traces.reserve(static_cast<size_t>(num_frames));

  RotoTranslation true_prev;
  for (long k = 0; k < num_frames; ++k) {
    const double time = static_cast<double>(k) / sc.frame_rate;
    const RotoTranslation true_pose = sc.trajectory.pose_at(time);
    const DepthImage depth = render_depth(sc.scene, sc.camera, true_pose);

    if (k == 0) {
      // The map frame is anchored to the known initial pose; the bootstrap
      // frame integrates without a registration step.
      state.pose = true_pose;
      integrate_depth(grid, depth, sc.camera, state.pose);
      reset_corrections_in_fov(grid, sc.camera, state.pose, depth);
      propagate_esdf(grid);
      true_prev = true_pose;
      continue;
    }

    SensorNoiseModel noise = sc.noise;
    noise.rng_seed = derive_seed(master_seed, kStreamCorrespondences, static_cast<std::uint64_t>(k));
    GeneratedCorrespondences gen;
    RegistrationResult reg;
    FrameTrace tr;
    tr.k = k;
    try {
      gen = generate_correspondences(sc.scene, sc.camera, true_prev, true_pose, sc.feature_count,
                                     noise);
      const auto t0 = clock_type::now();
      reg = register_frames(gen.set, sc.graph_fraction, sc.bound_iterations, sc.gnc,
                            derive_seed(master_seed, kStreamRegistration,
                                        static_cast<std::uint64_t>(k)));
      tr.registration_ms = ms_since(t0);
    } catch (const Error& e) {
      raise(e.code(), "frame " + std::to_string(k) + ": " + e.what());
    }

    step_frame(grid, depth, sc.camera, reg, state);

    const RotoTranslation true_delta = compose(invert(true_pose), true_prev);
    tr.rre = (reg.rotation_estimate.matrix() - true_delta.rotation.matrix()).norm();
    tr.rte = (reg.translation_estimate - true_delta.translation).norm();
    tr.epsilon_r = reg.epsilon_r;
    tr.epsilon_t = reg.epsilon_t;
    tr.converged = reg.converged;
    tr.integrate_ms = state.last_timings.integrate_ms;
    tr.deflate_ms = state.last_timings.deflate_ms;
    tr.propagate_ms = state.last_timings.propagate_ms;

    if (cfg.oracle) {
      if (tr.rre > tr.epsilon_r + 1e-12 || tr.rte > tr.epsilon_t + 1e-12) {
        ++summary.bound_breaches;
        logf(LogLevel::warn, "frame %ld: measured error exceeds bound (rre %.3g/%.3g rte %.3g/%.3g)",
             k, tr.rre, tr.epsilon_r, tr.rte, tr.epsilon_t);
      }
      const RotoTranslation map_to_inertial = compose(true_pose, invert(state.pose));
      tr.violation_count = count_violations(grid, sc.scene, map_to_inertial);
    }

    summary.traces.push_back(tr);
    true_prev = true_pose;
    if (cfg.stop_on_violation && tr.violation_count > 0) break;
  }

  finalize_summary(summary);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_traces(cfg.out_dir, summary.traces);
    write_summary_json(cfg.out_dir + "/summary.json", summary, sc);
    save_grid(grid, cfg.out_dir + "/snapshot.grid");
    for (double z : sc.slice_z) {
      char name[64];
      std::snprintf(name, sizeof(name), "/slice_z%.3f.csv", z);
      write_z_slice_csv(grid, z, cfg.out_dir + name);
    }
  }
  return summary;
}

void export_fig3_data(const Scenario& sc, const std::string& csv_path, int trials) {
  const int checkpoints[] = {1, 10, 100, 1000, 10000};
  std::vector<std::vector<double>> sampled(5);
  std::vector<double> full;

  const double t_step = 1.0 / sc.frame_rate;
  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t seed = derive_seed(sc.seed, kStreamTrials, static_cast<std::uint64_t>(trial));
    Rng pick(seed);
    const double t0 = pick.uniform(0.0, std::max(sc.duration - t_step, 0.0));
    SensorNoiseModel noise = sc.noise;
    noise.rng_seed = hash_seed(seed);
    const GeneratedCorrespondences gen =
        generate_correspondences(sc.scene, sc.camera, sc.trajectory.pose_at(t0),
                                 sc.trajectory.pose_at(t0 + t_step), sc.feature_count, noise);
    const PairGraph g = build_pair_graph(gen.set, sc.graph_fraction, hash_seed(seed + 1));
    const GncRotationResult rot = gnc_tls_rotation(g, sc.gnc);
    const Rotation r_hat = quat_to_rotation(rot.rotation);

    full.push_back(rotation_bound_full(g, r_hat));
    // Same seed across checkpoint calls: sample i of a longer run equals
    // sample i of a shorter one, so the minima are prefix-consistent.
    for (int c = 0; c < 5; ++c) {
      sampled[static_cast<size_t>(c)].push_back(
          rotation_bound_sampled(g, r_hat, checkpoints[c], hash_seed(seed + 2)));
    }
  }

  auto quartiles = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    const double median = (n % 2 == 1) ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    return std::array<double, 3>{v[n / 4], median, v[(3 * n) / 4]};
  };

  std::FILE* f = std::fopen(csv_path.c_str(), "w");
  if (!f) raise(Errc::io_error, "cannot write " + csv_path);
  std::fprintf(f, "iterations,lemma2_median,lemma2_q1,lemma2_q3,lemma3_median,lemma3_q1,lemma3_q3\n");
  const auto fq = quartiles(full);
  for (int c = 0; c < 5; ++c) {
    const auto sq = quartiles(sampled[static_cast<size_t>(c)]);
    std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", checkpoints[c], fq[1], fq[0], fq[2],
                 sq[1], sq[0], sq[2]);
  }
  std::fclose(f);
}

void export_fig5_data(const Scenario& sc, const std::string& csv_path) {
  const double fractions[] = {0.005, 0.01, 0.05, 0.1, 0.5, 1.0};
  constexpr int kFrames = 8;

  // Fixed frames shared across the sweep.
  std::vector<GeneratedCorrespondences> frames;
  const double t_step = 1.0 / sc.frame_rate;
  for (int i = 0; i < kFrames; ++i) {
    SensorNoiseModel noise = sc.noise;
    noise.rng_seed = derive_seed(sc.seed, kStreamTrials, 1000 + static_cast<std::uint64_t>(i));
    const double t0 = i * t_step;
    frames.push_back(generate_correspondences(sc.scene, sc.camera, sc.trajectory.pose_at(t0),
                                              sc.trajectory.pose_at(t0 + t_step),
                                              sc.feature_count, noise));
  }

  std::FILE* f = std::fopen(csv_path.c_str(), "w");
  if (!f) raise(Errc::io_error, "cannot write " + csv_path);
  std::fprintf(f, "fraction,mean_time_ms,mean_rre\n");
  for (double fraction : fractions) {
    double time_sum = 0.0, rre_sum = 0.0;
    for (int i = 0; i < kFrames; ++i) {
      const auto t0 = clock_type::now();
      const RegistrationResult reg =
          register_frames(frames[static_cast<size_t>(i)].set, fraction, sc.bound_iterations, sc.gnc,
                          derive_seed(sc.seed, kStreamRegistration, 2000 + static_cast<std::uint64_t>(i)));
      time_sum += ms_since(t0);
      rre_sum += (reg.rotation_estimate.matrix() -
                  frames[static_cast<size_t>(i)].ground_truth.rotation.matrix())
                     .norm();
    }
    std::fprintf(f, "%g,%.6g,%.17g\n", fraction, time_sum / kFrames, rre_sum / kFrames);
  }
  std::fclose(f);
}

}  // namespace certmap
