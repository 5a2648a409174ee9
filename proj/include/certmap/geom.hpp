#pragma once

#include <Eigen/Dense>

#include "certmap/error.hpp"

namespace certmap {

inline constexpr double kAlgebraTol = 1e-9;     // identities between our own values
inline constexpr double kValidationTol = 1e-6;  // validation of external inputs

/// Unit quaternion stored scalar-last: coeffs() = (x, y, z, w). This layout is
/// used everywhere in the project; nothing converts at module boundaries.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(0, 0, 0, 1) {}
  UnitQuaternion(double x, double y, double z, double w);
  static UnitQuaternion from_coeffs(const Eigen::Vector4d& coeffs);

  const Eigen::Vector4d& coeffs() const { return q_; }
  double x() const { return q_(0); }
  double y() const { return q_(1); }
  double z() const { return q_(2); }
  double w() const { return q_(3); }

  UnitQuaternion inverse() const { return UnitQuaternion(-q_(0), -q_(1), -q_(2), q_(3)); }

  /// Canonical sign: w >= 0, ties broken by the first nonzero component
  /// being positive. Makes round-trips through rotation matrices exact.
  UnitQuaternion canonical() const;

 private:
  Eigen::Vector4d q_;
};

/// Left-product matrix: a ∘ b = omega1(a) * b. Accepts non-unit 4-vectors
/// (e.g. points with an appended zero).
Eigen::Matrix4d omega1(const Eigen::Vector4d& q);
/// Right-product matrix: a ∘ b = omega2(b) * a.
Eigen::Matrix4d omega2(const Eigen::Vector4d& q);

UnitQuaternion quat_product(const UnitQuaternion& a, const UnitQuaternion& b);

/// Append a zero scalar component to a 3-vector.
inline Eigen::Vector4d pure_quat(const Eigen::Vector3d& v) {
  return Eigen::Vector4d(v(0), v(1), v(2), 0.0);
}

/// Proper rotation matrix. Construct via from_matrix (validated) or
/// quat_to_rotation (trusted).
class Rotation {
 public:
  Rotation() : m_(Eigen::Matrix3d::Identity()) {}

  /// Validates orthonormality and det = +1 at kValidationTol.
  static Rotation from_matrix(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return m_; }
  Rotation transposed() const { return Rotation(m_.transpose(), Unchecked{}); }
  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return m_ * v; }

 private:
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : m_(m) {}
  Eigen::Matrix3d m_;
  friend Rotation quat_to_rotation(const UnitQuaternion& q);
  friend class RotationTestAccess;
};

Rotation quat_to_rotation(const UnitQuaternion& q);
/// Inverse of quat_to_rotation, canonical sign. Throws invalid_rotation if the
/// matrix fails validation.
UnitQuaternion rotation_to_quat(const Rotation& r);

/// Conversion between the Frobenius-norm distance of two rotations and the
/// geodesic angle between them. Valid for f in [0, 2*sqrt(2)], theta in [0, pi].
double frobenius_to_angle(double f);
double angle_to_frobenius(double theta);

/// Rigid transform p_out = rotation * p_in + translation.
struct RotoTranslation {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// outer ∘ inner: applies inner first.
RotoTranslation compose(const RotoTranslation& outer, const RotoTranslation& inner);
RotoTranslation invert(const RotoTranslation& t);
Eigen::Vector3d transform_point(const RotoTranslation& t, const Eigen::Vector3d& p);

}  // namespace certmap
