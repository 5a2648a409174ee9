#include "certmap/registration.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "certmap/rng.hpp"
#include "certmap/small_linalg.hpp"

namespace certmap {

void GncConfig::validate() const {
  if (max_iterations < 1) raise(Errc::invalid_input, "gnc max_iterations must be >= 1");
  if (!(mu_update_factor > 1.0)) raise(Errc::invalid_input, "gnc mu_update_factor must be > 1");
  if (!(convergence_tol > 0.0)) raise(Errc::invalid_input, "gnc convergence_tol must be > 0");
  if (!(noise_multiplier > 0.0)) raise(Errc::invalid_input, "gnc noise_multiplier must be > 0");
}

UnitQuaternion wls_rotation(const PairGraph& g, const std::vector<double>& weights) {
  if (weights.size() != g.edges.size()) {
    raise(Errc::invalid_input, "weight count does not match edge count");
  }
  int active = 0;
  for (double w : weights) {
    if (w > 0.0) ++active;
  }
  if (active < 3) raise(Errc::ambiguous_rotation, "fewer than 3 edges with positive weight");

  Eigen::Matrix4d q_acc = Eigen::Matrix4d::Zero();
  for (size_t e = 0; e < g.edges.size(); ++e) {
    const double w = weights[e];
    if (w == 0.0) continue;
    const Eigen::Matrix4d o1b = omega1(pure_quat(g.edges[e].b_diff));
    const Eigen::Matrix4d o2a = omega2(pure_quat(g.edges[e].a_diff));
    q_acc.noalias() -= w * (o1b.transpose() * o2a + o2a.transpose() * o1b);
  }
  assert((q_acc - q_acc.transpose()).norm() < 1e-6 * (1.0 + q_acc.norm()));

  const SymmetricEigen<4> eig = jacobi_eigen<4>(q_acc);
  if (eig.values(1) - eig.values(0) < 1e-9) {
    raise(Errc::ambiguous_rotation, "smallest eigenvalues nearly equal; rotation not identifiable");
  }
  return UnitQuaternion::from_coeffs(eig.vectors.col(0)).canonical();
}

namespace {

// Shared GNC-TLS weight schedule. residuals/truncations are per-term;
// mu follows the standard surrogate annealing. Returns true once the max
// weight change drops below tol.
struct GncState {
  double mu = 0.0;
  bool initialized = false;

  void init(const std::vector<double>& residuals_sq, const std::vector<double>& trunc_sq) {
    double r_max_sq = 0.0, c_max_sq = 0.0;
    for (size_t k = 0; k < residuals_sq.size(); ++k) {
      r_max_sq = std::max(r_max_sq, residuals_sq[k]);
      c_max_sq = std::max(c_max_sq, trunc_sq[k]);
    }
    const double denom = 2.0 * r_max_sq - c_max_sq;
    mu = denom > 0.0 ? c_max_sq / denom : 1e6;
    mu = std::clamp(mu, 1e-6, 1e6);
    initialized = true;
  }

  double update_weights(const std::vector<double>& residuals_sq,
                        const std::vector<double>& trunc_sq, std::vector<double>& weights) const {
    double max_change = 0.0;
    for (size_t k = 0; k < weights.size(); ++k) {
      const double c_sq = trunc_sq[k];
      const double upper = (mu + 1.0) / mu * c_sq;
      const double lower = mu / (mu + 1.0) * c_sq;
      double w;
      const double r_sq = residuals_sq[k];
      if (r_sq >= upper) {
        w = 0.0;
      } else if (r_sq <= lower) {
        w = 1.0;
      } else {
        w = std::sqrt(c_sq * mu * (mu + 1.0) / r_sq) - mu;
        w = std::clamp(w, 0.0, 1.0);
      }
      max_change = std::max(max_change, std::abs(w - weights[k]));
      weights[k] = w;
    }
    return max_change;
  }

  void anneal(double factor) { mu = std::min(mu * factor, 1e12); }
};

double tls_cost(const std::vector<double>& residuals_sq, const std::vector<double>& trunc_sq) {
  double cost = 0.0;
  for (size_t k = 0; k < residuals_sq.size(); ++k) {
    cost += std::min(residuals_sq[k], trunc_sq[k]);
  }
  return cost;
}

}  // namespace

GncRotationResult gnc_tls_rotation(const PairGraph& g, const GncConfig& cfg) {
  cfg.validate();
  const size_t m = g.edges.size();
  std::vector<double> trunc_sq(m);
  for (size_t e = 0; e < m; ++e) {
    const double c = g.edges[e].delta * cfg.noise_multiplier;
    trunc_sq[e] = c * c;
  }

  GncRotationResult out;
  out.weights.assign(m, 1.0);
  std::vector<double> residuals_sq(m);
  GncState gnc;

  double best_cost = std::numeric_limits<double>::infinity();
  UnitQuaternion best_q;
  std::vector<double> best_weights = out.weights;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    const UnitQuaternion q = wls_rotation(g, out.weights);
    const Eigen::Matrix3d r = quat_to_rotation(q).matrix();
    for (size_t e = 0; e < m; ++e) {
      residuals_sq[e] = (g.edges[e].b_diff - r * g.edges[e].a_diff).squaredNorm();
    }
    const double cost = tls_cost(residuals_sq, trunc_sq);
    if (cost < best_cost) {
      best_cost = cost;
      best_q = q;
      best_weights = out.weights;
    }
    if (!gnc.initialized) gnc.init(residuals_sq, trunc_sq);

    const double change = gnc.update_weights(residuals_sq, trunc_sq, out.weights);
    if (change < cfg.convergence_tol) {
      out.rotation = q;
      out.converged = true;
      return out;
    }
    gnc.anneal(cfg.mu_update_factor);
  }

  out.rotation = best_q;
  out.weights = best_weights;
  out.converged = false;
  return out;
}

namespace {

double bound_from_gram(double z_sq_sum, const Eigen::Matrix3d& gram) {
  const Eigen::Vector3d sv = singular_values_from_gram(gram);
  const double denom = sv(1) * sv(1) + sv(2) * sv(2);
  if (denom < 1e-12) {
    raise(Errc::unobservable_rotation,
          "pair directions span fewer than two dimensions; bound diverges");
  }
  return std::sqrt(2.0 * z_sq_sum / denom);
}

}  // namespace

double rotation_bound_full(const PairGraph& g, const Rotation& estimate) {
  if (g.edges.size() < 3) raise(Errc::invalid_input, "bound needs at least 3 edges");
  const Eigen::Matrix3d& r = estimate.matrix();
  double z_sq = 0.0;
  Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
  for (const PairGraph::Edge& e : g.edges) {
    const double z = ((e.b_diff - r * e.a_diff).norm() + e.delta) / e.a_norm;
    z_sq += z * z;
    const Eigen::Vector3d u = e.a_diff / e.a_norm;
    gram.noalias() += u * u.transpose();
  }
  return bound_from_gram(z_sq, gram);
}

double rotation_bound_sampled(const PairGraph& g, const Rotation& estimate, int iterations,
                              std::uint64_t rng_seed) {
  if (iterations < 1) raise(Errc::invalid_input, "iterations must be >= 1");
  const Eigen::Matrix3d& r = estimate.matrix();
  const int n = g.num_vertices;

  Rng rng(rng_seed);
  double best = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < iterations; ++iter) {
    // Draw a star: a center vertex with >= 3 incident edges. A center with
    // lower degree is redrawn a few times before the iteration is skipped.
    int center = -1;
    for (int attempt = 0; attempt < 10; ++attempt) {
      const int v = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      if (g.incident[static_cast<size_t>(v)].size() >= 3) {
        center = v;
        break;
      }
    }
    if (center < 0) continue;

    const auto& inc = g.incident[static_cast<size_t>(center)];
    // Three distinct incident edges via partial Fisher-Yates on indices.
    size_t pick[3];
    {
      const size_t deg = inc.size();
      size_t i0 = rng.uniform_int(deg);
      size_t i1 = rng.uniform_int(deg - 1);
      if (i1 >= i0) ++i1;
      size_t i2 = rng.uniform_int(deg - 2);
      for (size_t taken : {std::min(i0, i1), std::max(i0, i1)}) {
        if (i2 >= taken) ++i2;
      }
      pick[0] = i0;
      pick[1] = i1;
      pick[2] = i2;
    }

    double z_sq = 0.0;
    Eigen::Matrix3d gram = Eigen::Matrix3d::Zero();
    for (size_t k = 0; k < 3; ++k) {
      const PairGraph::Edge& e = g.edges[static_cast<size_t>(inc[pick[k]])];
      const double z = ((e.b_diff - r * e.a_diff).norm() + e.delta) / e.a_norm;
      z_sq += z * z;
      const Eigen::Vector3d u = e.a_diff / e.a_norm;
      gram.noalias() += u * u.transpose();
    }
    const Eigen::Vector3d sv = singular_values_from_gram(gram);
    const double denom = sv(1) * sv(1) + sv(2) * sv(2);
    if (denom < 1e-12) continue;
    best = std::min(best, std::sqrt(2.0 * z_sq / denom));
  }

  if (!std::isfinite(best)) {
    raise(Errc::unobservable_rotation, "no usable 3-edge star sample found");
  }
  return best;
}

GncTranslationResult gnc_tls_translation(const CorrespondenceSet& c, const Rotation& estimate,
                                         const GncConfig& cfg) {
  cfg.validate();
  if (c.size() < 1) raise(Errc::invalid_input, "need at least one correspondence");
  const size_t n = static_cast<size_t>(c.size());
  const Eigen::Matrix3d& r = estimate.matrix();

  std::vector<Eigen::Vector3d> shifted(n);
  std::vector<double> trunc_sq(n);
  for (size_t i = 0; i < n; ++i) {
    shifted[i] = c.b[i] - r * c.a[i];
    const double t = c.delta[i] * cfg.noise_multiplier;
    trunc_sq[i] = t * t;
  }

  GncTranslationResult out;
  out.weights.assign(n, 1.0);
  std::vector<double> residuals_sq(n);
  GncState gnc;

  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::Vector3d best_t = Eigen::Vector3d::Zero();
  std::vector<double> best_weights = out.weights;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    double w_sum = 0.0;
    Eigen::Vector3d acc = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < n; ++i) {
      acc += out.weights[i] * shifted[i];
      w_sum += out.weights[i];
    }
    if (w_sum <= 0.0) {
      raise(Errc::no_consensus, "all translation weights collapsed to zero");
    }
    const Eigen::Vector3d t = acc / w_sum;

    for (size_t i = 0; i < n; ++i) residuals_sq[i] = (shifted[i] - t).squaredNorm();
    const double cost = tls_cost(residuals_sq, trunc_sq);
    if (cost < best_cost) {
      best_cost = cost;
      best_t = t;
      best_weights = out.weights;
    }
    if (!gnc.initialized) gnc.init(residuals_sq, trunc_sq);

    const double change = gnc.update_weights(residuals_sq, trunc_sq, out.weights);
    if (change < cfg.convergence_tol) {
      out.translation = t;
      out.converged = true;
      return out;
    }
    gnc.anneal(cfg.mu_update_factor);
  }

  out.translation = best_t;
  out.weights = best_weights;
  out.converged = false;
  return out;
}

double translation_bound(const CorrespondenceSet& c, const Rotation& rotation_estimate,
                         const Eigen::Vector3d& translation_estimate, double epsilon_r) {
  if (c.size() < 1) raise(Errc::invalid_input, "need at least one correspondence");
  if (epsilon_r < 0.0) raise(Errc::invalid_input, "epsilon_r must be nonnegative");
  const Eigen::Matrix3d& r = rotation_estimate.matrix();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < c.size(); ++i) {
    const double fit = (c.b[static_cast<size_t>(i)] - r * c.a[static_cast<size_t>(i)] -
                        translation_estimate)
                           .norm();
    best = std::min(best, epsilon_r * c.a[static_cast<size_t>(i)].norm() + fit +
                              c.delta[static_cast<size_t>(i)]);
  }
  return best;
}

RegistrationResult register_frames(const CorrespondenceSet& c, double fraction,
                                   int bound_iterations, const GncConfig& cfg,
                                   std::uint64_t rng_seed) {
  auto with_stage = [](const char* stage, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      throw Error(e.code(), std::string(stage) + ": " + e.what());
    }
  };

  const PairGraph g = with_stage("build_pair_graph",
                                 [&] { return build_pair_graph(c, fraction, derive_seed(rng_seed, 0)); });
  const GncRotationResult rot =
      with_stage("gnc_tls_rotation", [&] { return gnc_tls_rotation(g, cfg); });
  const Rotation r_hat = quat_to_rotation(rot.rotation);
  const double eps_r = with_stage("rotation_bound_sampled", [&] {
    return rotation_bound_sampled(g, r_hat, bound_iterations, derive_seed(rng_seed, 1));
  });
  const GncTranslationResult trans =
      with_stage("gnc_tls_translation", [&] { return gnc_tls_translation(c, r_hat, cfg); });
  const double eps_t = with_stage("translation_bound", [&] {
    return translation_bound(c, r_hat, trans.translation, eps_r);
  });

  RegistrationResult out;
  out.rotation_estimate = r_hat;
  out.translation_estimate = trans.translation;
  out.epsilon_r = eps_r;
  out.epsilon_t = eps_t;
  out.rotation_weights = rot.weights;
  out.translation_weights = trans.weights;
  out.converged = rot.converged && trans.converged;
  return out;
}

}  // namespace certmap
