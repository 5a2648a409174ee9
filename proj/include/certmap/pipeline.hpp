#pragma once

#include <optional>
#include <string>
#include <vector>

#include "certmap/scenario.hpp"

namespace certmap {

/// Per-frame record. rre/rte compare the frame delta estimate against the
/// simulator ground truth; violation_count is the number of voxels whose
/// certified distance exceeded the true distance this frame (oracle mode).
struct FrameTrace {
  long k = 0;
  double rre = 0.0;  // ||R_hat - R||_F
  double rte = 0.0;  // ||t_hat - t||, meters
  double epsilon_r = 0.0;
  double epsilon_t = 0.0;
  double registration_ms = 0.0;
  double deflate_ms = 0.0;
  double integrate_ms = 0.0;
  double propagate_ms = 0.0;
  long violation_count = 0;
  bool converged = false;
};

struct RunConfig {
  std::string scenario_path;
  std::optional<std::uint64_t> seed_override;
  std::optional<double> fraction_override;
  std::optional<int> iterations_override;
  bool oracle = false;
  bool stop_on_violation = false;  // bail out after the first violating frame
  std::string out_dir;             // empty: keep results in memory only
  std::optional<std::string> correspondence_file;  // registration-only mode
};

struct RunSummary {
  long frames = 0;  // registered frames (excludes the bootstrap frame)
  double rms_rre = 0.0, rms_rte = 0.0;
  double rms_epsilon_r = 0.0, rms_epsilon_t = 0.0;
  double rotation_bound_ratio = 0.0;     // rms bound / rms error
  double translation_bound_ratio = 0.0;
  long total_violations = 0;
  long bound_breaches = 0;  // frames where the measured error exceeded its bound
  double mean_registration_ms = 0.0;
  double mean_integrate_ms = 0.0;
  double mean_deflate_ms = 0.0;
  double mean_propagate_ms = 0.0;
  std::vector<FrameTrace> traces;
};

/// Full simulate-register-map loop over the scenario. Writes trace.csv,
/// timings.csv, summary.json, snapshot.grid and slice CSVs into out_dir when
/// set. trace.csv and the slices contain no timing data and are byte-stable
/// for a fixed scenario and seed.
RunSummary run_scenario(const RunConfig& cfg);

/// Bound-tightness sweep: randomized registration trials; per iteration count
/// in {1, 10, 100, 1000, 10000} the median/IQR of the sampled 3-edge bound
/// next to the all-edges bound. Header:
/// iterations,lemma2_median,lemma2_q1,lemma2_q3,lemma3_median,lemma3_q1,lemma3_q3
void export_fig3_data(const Scenario& sc, const std::string& csv_path, int trials = 100);

/// Graph-fraction sweep on fixed synthetic frames. Header:
/// fraction,mean_time_ms,mean_rre
void export_fig5_data(const Scenario& sc, const std::string& csv_path);

}  // namespace certmap
