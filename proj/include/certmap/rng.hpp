#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace certmap {

// splitmix64 finalizer. Used to fan a master seed out into stream seeds so
// that e.g. single frames of a run can be re-generated in isolation.
inline std::uint64_t hash_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
  return hash_seed(master ^ hash_seed(stream ^ hash_seed(index)));
}

/// mt19937_64 plus hand-rolled sampling helpers. The std::* distributions are
/// implementation-defined, so every reproducible draw in the project goes
/// through this class instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform in {0, ..., n-1}, rejection-sampled (no modulo bias).
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % n;
  }

  /// Uniform direction on the unit sphere.
  Eigen::Vector3d unit_vector3() {
    while (true) {
      Eigen::Vector3d v(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
      const double n2 = v.squaredNorm();
      if (n2 > 1e-6 && n2 <= 1.0) return v / std::sqrt(n2);
    }
  }

  /// Uniform unit quaternion coefficients (x, y, z, w).
  Eigen::Vector4d unit_vector4() {
    while (true) {
      Eigen::Vector4d v(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0),
                        uniform(-1.0, 1.0));
      const double n2 = v.squaredNorm();
      if (n2 > 1e-6 && n2 <= 1.0) return v / std::sqrt(n2);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace certmap
