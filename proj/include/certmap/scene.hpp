#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "certmap/error.hpp"

namespace certmap {

struct Sphere {
  Eigen::Vector3d center;
  double radius = 0.0;
};

struct AxisBox {
  Eigen::Vector3d min;
  Eigen::Vector3d max;
};

/// Solid halfspace: occupied where normal.dot(p) - offset <= 0.
struct Plane {
  Eigen::Vector3d normal;  // unit, points away from the solid side
  double offset = 0.0;
};

using Primitive = std::variant<Sphere, AxisBox, Plane>;

/// Analytic obstacle set with an exact signed distance, inertial frame.
struct Scene {
  std::vector<Primitive> primitives;
  void validate() const;
};

double primitive_sdf(const Primitive& prim, const Eigen::Vector3d& p);

/// Distance to the nearest obstacle: min over primitives, <= 0 inside.
double scene_sdf(const Scene& scene, const Eigen::Vector3d& p);

}  // namespace certmap
