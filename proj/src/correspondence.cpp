#include "certmap/correspondence.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "certmap/rng.hpp"

namespace certmap {

void CorrespondenceSet::validate() const {
  if (a.size() != b.size() || a.size() != delta.size()) {
    raise(Errc::invalid_input, "correspondence arrays have mismatched lengths");
  }
  if (size() < 4) {
    raise(Errc::invalid_input, "need at least 4 correspondences");
  }
  for (double d : delta) {
    if (!(d > 0.0) || !std::isfinite(d)) {
      raise(Errc::invalid_input, "noise bounds must be positive and finite");
    }
  }
}

CorrespondenceSet load_correspondences(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::io_error, "cannot open correspondence file: " + path);

  CorrespondenceSet c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream row(line);
    double v[7];
    int got = 0;
    while (got < 7 && (row >> v[got])) ++got;
    if (got == 0) continue;  // blank or comment-only line
    double extra;
    if (got != 7 || (row >> extra)) {
      raise(Errc::io_error,
            path + ":" + std::to_string(line_no) + ": expected 7 columns (ax ay az bx by bz delta)");
    }
    c.a.emplace_back(v[0], v[1], v[2]);
    c.b.emplace_back(v[3], v[4], v[5]);
    c.delta.push_back(v[6]);
  }
  c.validate();
  return c;
}

void save_correspondences(const CorrespondenceSet& c, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) raise(Errc::io_error, "cannot write correspondence file: " + path);
  std::fputs("# ax ay az bx by bz delta\n", out);
  for (int i = 0; i < c.size(); ++i) {
    std::fprintf(out, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", c.a[i](0), c.a[i](1),
                 c.a[i](2), c.b[i](0), c.b[i](1), c.b[i](2), c.delta[i]);
  }
  std::fclose(out);
}

namespace {

// Linear index -> (i, j), i < j, row-major over the strict upper triangle.
std::pair<int, int> pair_from_index(std::int64_t idx, int n) {
  auto offset = [n](std::int64_t i) { return i * (n - 1) - i * (i - 1) / 2; };
  std::int64_t lo = 0, hi = n - 1;  // find largest i with offset(i) <= idx
  while (lo + 1 < hi) {
    const std::int64_t mid = (lo + hi) / 2;
    if (offset(mid) <= idx) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const int i = static_cast<int>(lo);
  const int j = static_cast<int>(i + 1 + (idx - offset(lo)));
  return {i, j};
}

}  // namespace

PairGraph build_pair_graph(const CorrespondenceSet& c, double fraction, std::uint64_t rng_seed) {
  c.validate();
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    raise(Errc::invalid_input, "graph fraction must be in (0, 1]");
  }

  const int n = c.size();
  const std::int64_t total = static_cast<std::int64_t>(n) * (n - 1) / 2;
  const std::int64_t target =
      static_cast<std::int64_t>(std::ceil(fraction * static_cast<double>(total)));
  if (target < 3) {
    raise(Errc::degenerate_graph, "edge budget below 3; raise the graph fraction");
  }

  PairGraph g;
  g.num_vertices = n;
  g.edges.reserve(static_cast<size_t>(target));

  auto try_add = [&](int i, int j) {
    PairGraph::Edge e;
    e.i = i;
    e.j = j;
    e.a_diff = c.a[i] - c.a[j];
    e.b_diff = c.b[i] - c.b[j];
    e.delta = c.delta[i] + c.delta[j];
    e.a_norm = e.a_diff.norm();
    if (e.a_norm <= kMinPairBaseline) return false;
    g.edges.push_back(e);
    return true;
  };

  Rng rng(rng_seed);
  if (2 * target >= total) {
    // Dense request: shuffle the full index range and take the first
    // non-degenerate `target` pairs.
    std::vector<std::int64_t> order(static_cast<size_t>(total));
    for (std::int64_t k = 0; k < total; ++k) order[static_cast<size_t>(k)] = k;
    for (std::int64_t k = total - 1; k > 0; --k) {
      const std::int64_t r = static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(k + 1)));
      std::swap(order[static_cast<size_t>(k)], order[static_cast<size_t>(r)]);
    }
    for (std::int64_t idx : order) {
      if (static_cast<std::int64_t>(g.edges.size()) == target) break;
      const auto [i, j] = pair_from_index(idx, n);
      try_add(i, j);
    }
  } else {
    std::unordered_set<std::int64_t> used;
    while (static_cast<std::int64_t>(g.edges.size()) < target &&
           static_cast<std::int64_t>(used.size()) < total) {
      const std::int64_t idx =
          static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(total)));
      if (!used.insert(idx).second) continue;
      const auto [i, j] = pair_from_index(idx, n);
      try_add(i, j);
    }
  }

  if (static_cast<std::int64_t>(g.edges.size()) < 3) {
    raise(Errc::degenerate_graph, "fewer than 3 non-degenerate pairs available");
  }

  g.incident.assign(static_cast<size_t>(n), {});
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    g.incident[static_cast<size_t>(g.edges[e].i)].push_back(e);
    g.incident[static_cast<size_t>(g.edges[e].j)].push_back(e);
  }
  return g;
}

}  // namespace certmap
