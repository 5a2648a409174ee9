#pragma once

#include <Eigen/Dense>

namespace certmap {

/// Eigendecomposition of a small (N <= 4) symmetric matrix. Eigenvalues are
/// ascending; vectors(:, k) is the unit eigenvector for values(k).
template <int N>
struct SymmetricEigen {
  Eigen::Matrix<double, N, 1> values;
  Eigen::Matrix<double, N, N> vectors;
};

/// Cyclic Jacobi rotations. Self-contained so the solver behind the rotation
/// estimate and the error bounds has no hidden dependencies; converges to
/// machine precision in a handful of sweeps for these sizes.
template <int N>
SymmetricEigen<N> jacobi_eigen(const Eigen::Matrix<double, N, N>& input) {
  Eigen::Matrix<double, N, N> a = 0.5 * (input + input.transpose());
  Eigen::Matrix<double, N, N> v = Eigen::Matrix<double, N, N>::Identity();

  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < N; ++p)
      for (int q = p + 1; q < N; ++q) off += a(p, q) * a(p, q);
    if (off < 1e-300) break;

    for (int p = 0; p < N; ++p) {
      for (int q = p + 1; q < N; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < N; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < N; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < N; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  SymmetricEigen<N> out;
  std::array<int, N> order;
  for (int i = 0; i < N; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int lhs, int rhs) { return a(lhs, lhs) < a(rhs, rhs); });
  for (int i = 0; i < N; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

/// Singular values (descending) of a 3-row matrix given its 3x3 Gram matrix
/// A*A^T. Keeping to the Gram form means bounds over large edge sets never
/// build anything bigger than 3x3.
Eigen::Vector3d singular_values_from_gram(const Eigen::Matrix3d& gram);

}  // namespace certmap
