#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "certmap/error.hpp"

namespace certmap {

/// Matched point pairs between two frames: b_i ≈ R a_i + t with per-point
/// noise magnitude bounded by delta_i (meters).
struct CorrespondenceSet {
  std::vector<Eigen::Vector3d> a;  // frame k
  std::vector<Eigen::Vector3d> b;  // frame k+1
  std::vector<double> delta;

  int size() const { return static_cast<int>(a.size()); }
  void validate() const;
};

/// Columnar text format: one record per line,
///   a_x a_y a_z b_x b_y b_z delta
/// in meters; '#' starts a comment. Parse errors report line numbers.
CorrespondenceSet load_correspondences(const std::string& path);
void save_correspondences(const CorrespondenceSet& c, const std::string& path);

/// Translation-invariant pairwise differences over a sampled edge set.
struct PairGraph {
  struct Edge {
    int i = 0, j = 0;
    Eigen::Vector3d a_diff;  // a_i - a_j
    Eigen::Vector3d b_diff;  // b_i - b_j
    double delta = 0.0;      // delta_i + delta_j
    double a_norm = 0.0;     // cached ||a_diff||
  };

  int num_vertices = 0;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> incident;  // vertex -> indices into edges
};

/// Pairs with a baseline under this are dropped from graphs: the bound
/// divides by ||a_i - a_j||.
inline constexpr double kMinPairBaseline = 1e-6;

/// Samples ceil(fraction * N(N-1)/2) distinct pairs uniformly without
/// replacement, resampling past degenerate pairs while any remain.
/// Deterministic for a given seed.
PairGraph build_pair_graph(const CorrespondenceSet& c, double fraction, std::uint64_t rng_seed);

}  // namespace certmap
