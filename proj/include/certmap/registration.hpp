#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "certmap/correspondence.hpp"
#include "certmap/geom.hpp"

namespace certmap {

/// Graduated non-convexity schedule. The truncation per residual is
/// delta * noise_multiplier; mu anneals from near-convex toward the exact
/// truncated cost by mu_update_factor per iteration.
struct GncConfig {
  int max_iterations = 100;
  double mu_update_factor = 1.4;
  double convergence_tol = 1e-6;  // max per-weight change
  double noise_multiplier = 1.0;

  void validate() const;
};

struct RegistrationResult {
  Rotation rotation_estimate;
  Eigen::Vector3d translation_estimate = Eigen::Vector3d::Zero();
  double epsilon_r = 0.0;  // Frobenius-norm rotation error bound
  double epsilon_t = 0.0;  // meters
  std::vector<double> rotation_weights;     // per graph edge, in [0, 1]
  std::vector<double> translation_weights;  // per point, in [0, 1]
  bool converged = false;
};

/// Weighted least-squares rotation fit over the pair graph. The minimizer is
/// the eigenvector for the smallest eigenvalue of an accumulated symmetric
/// 4x4; returned with canonical sign. Throws ambiguous_rotation when the two
/// smallest eigenvalues are within 1e-9 (e.g. collinear pair directions) or
/// when fewer than 3 edges carry positive weight.
UnitQuaternion wls_rotation(const PairGraph& g, const std::vector<double>& weights);

struct GncRotationResult {
  UnitQuaternion rotation;
  std::vector<double> weights;
  bool converged = false;
};
GncRotationResult gnc_tls_rotation(const PairGraph& g, const GncConfig& cfg);

/// Worst-case rotation error bound using every edge of the graph (weights do
/// not enter). Throws unobservable_rotation when the pair directions span
/// fewer than two dimensions.
double rotation_bound_full(const PairGraph& g, const Rotation& estimate);

/// Tighter bound: minimum over `iterations` random 3-edge star subgraphs
/// (edges sharing a center vertex). Deterministic for a given seed.
double rotation_bound_sampled(const PairGraph& g, const Rotation& estimate, int iterations,
                              std::uint64_t rng_seed);

struct GncTranslationResult {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  std::vector<double> weights;
  bool converged = false;
};
GncTranslationResult gnc_tls_translation(const CorrespondenceSet& c, const Rotation& estimate,
                                         const GncConfig& cfg);

/// Worst-case translation error bound, evaluated over all points.
double translation_bound(const CorrespondenceSet& c, const Rotation& rotation_estimate,
                         const Eigen::Vector3d& translation_estimate, double epsilon_r);

/// Full frame-to-frame solve: pair graph, robust rotation, sampled rotation
/// bound, robust translation, translation bound. The estimate maps frame-k
/// coordinates into frame k+1: b = R a + t.
RegistrationResult register_frames(const CorrespondenceSet& c, double fraction,
                                   int bound_iterations, const GncConfig& cfg,
                                   std::uint64_t rng_seed);

}  // namespace certmap
