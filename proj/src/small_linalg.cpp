#include "certmap/small_linalg.hpp"

#include <algorithm>
#include <cmath>

namespace certmap {

Eigen::Vector3d singular_values_from_gram(const Eigen::Matrix3d& gram) {
  const SymmetricEigen<3> eig = jacobi_eigen<3>(gram);
  Eigen::Vector3d sv;
  for (int i = 0; i < 3; ++i) {
    // Gram eigenvalues are >= 0 up to roundoff; clamp before the sqrt.
    sv(i) = std::sqrt(std::max(eig.values(2 - i), 0.0));
  }
  return sv;
}

}  // namespace certmap
