#include "certmap/geom.hpp"

#include <cassert>
#include <cmath>

namespace certmap {

UnitQuaternion::UnitQuaternion(double x, double y, double z, double w) : q_(x, y, z, w) {
  const double n = q_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    raise(Errc::invalid_input, "quaternion has zero or non-finite norm");
  }
  q_ /= n;
}

UnitQuaternion UnitQuaternion::from_coeffs(const Eigen::Vector4d& coeffs) {
  return UnitQuaternion(coeffs(0), coeffs(1), coeffs(2), coeffs(3));
}

UnitQuaternion UnitQuaternion::canonical() const {
  // w >= 0; a tie (w == 0) is broken by the first nonzero of (x, y, z).
  double sign = 0.0;
  if (q_(3) != 0.0) {
    sign = (q_(3) > 0.0) ? 1.0 : -1.0;
  } else {
    for (int i = 0; i < 3 && sign == 0.0; ++i) {
      if (q_(i) != 0.0) sign = (q_(i) > 0.0) ? 1.0 : -1.0;
    }
  }
  if (sign == 0.0) sign = 1.0;
  UnitQuaternion out = *this;
  out.q_ *= sign;
  return out;
}

Eigen::Matrix4d omega1(const Eigen::Vector4d& q) {
  const double q1 = q(0), q2 = q(1), q3 = q(2), q4 = q(3);
  Eigen::Matrix4d m;
  m <<  q4, -q3,  q2, q1,
        q3,  q4, -q1, q2,
       -q2,  q1,  q4, q3,
       -q1, -q2, -q3, q4;
  return m;
}

Eigen::Matrix4d omega2(const Eigen::Vector4d& q) {
  const double q1 = q(0), q2 = q(1), q3 = q(2), q4 = q(3);
  Eigen::Matrix4d m;
  m <<  q4,  q3, -q2, q1,
       -q3,  q4,  q1, q2,
        q2, -q1,  q4, q3,
       -q1, -q2, -q3, q4;
  return m;
}

UnitQuaternion quat_product(const UnitQuaternion& a, const UnitQuaternion& b) {
  const Eigen::Vector4d c = omega1(a.coeffs()) * b.coeffs();
#ifndef NDEBUG
  const Eigen::Vector4d c2 = omega2(b.coeffs()) * a.coeffs();
  assert((c - c2).norm() < kAlgebraTol);
#endif
  return UnitQuaternion::from_coeffs(c);
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (ortho > kValidationTol || std::abs(m.determinant() - 1.0) > kValidationTol) {
    raise(Errc::invalid_rotation, "matrix is not a proper rotation");
  }
  return Rotation(m, Unchecked{});
}

Rotation quat_to_rotation(const UnitQuaternion& q) {
  const double x = q.x(), y = q.y(), z = q.z(), w = q.w();
  Eigen::Matrix3d m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w),     2 * (x * z + y * w),
       2 * (x * y + z * w),     1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
       2 * (x * z - y * w),     2 * (y * z + x * w),     1 - 2 * (x * x + y * y);
  return Rotation(m, Rotation::Unchecked{});
}

UnitQuaternion rotation_to_quat(const Rotation& r) {
  const Eigen::Matrix3d& m = r.matrix();
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (ortho > kValidationTol || std::abs(m.determinant() - 1.0) > kValidationTol) {
    raise(Errc::invalid_rotation, "matrix is not a proper rotation");
  }

  // Shepperd's method: pick the largest of the four pivots for stability.
  const double t = m.trace();
  double x, y, z, w;
  if (t > m(0, 0) && t > m(1, 1) && t > m(2, 2)) {
    const double s = std::sqrt(t + 1.0) * 2.0;
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    x = 0.25 * s;
    w = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    y = 0.25 * s;
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    z = 0.25 * s;
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
  }
  return UnitQuaternion(x, y, z, w).canonical();
}

double frobenius_to_angle(double f) {
  constexpr double kMax = 2.0 * 1.4142135623730951;
  if (f < -kAlgebraTol || f > kMax + kAlgebraTol) {
    raise(Errc::out_of_range, "frobenius distance outside [0, 2*sqrt(2)]");
  }
  const double c = std::clamp(1.0 - f * f / 4.0, -1.0, 1.0);
  return std::acos(c);
}

double angle_to_frobenius(double theta) {
  constexpr double kPi = 3.141592653589793;
  if (theta < -kAlgebraTol || theta > kPi + kAlgebraTol) {
    raise(Errc::out_of_range, "angle outside [0, pi]");
  }
  theta = std::clamp(theta, 0.0, kPi);
  return 2.0 * std::sqrt(2.0) * std::sin(theta / 2.0);
}

RotoTranslation compose(const RotoTranslation& outer, const RotoTranslation& inner) {
  RotoTranslation out;
  out.rotation = quat_to_rotation(quat_product(rotation_to_quat(outer.rotation),
                                               rotation_to_quat(inner.rotation)));
  out.translation = outer.rotation * inner.translation + outer.translation;
  return out;
}

RotoTranslation invert(const RotoTranslation& t) {
  RotoTranslation out;
  out.rotation = t.rotation.transposed();
  out.translation = -(out.rotation * t.translation);
  return out;
}

Eigen::Vector3d transform_point(const RotoTranslation& t, const Eigen::Vector3d& p) {
  return t.rotation * p + t.translation;
}

}  // namespace certmap
