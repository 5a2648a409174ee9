#include "certmap/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace certmap {

void Scene::validate() const {
  if (primitives.empty()) raise(Errc::invalid_input, "scene needs at least one primitive");
  for (const Primitive& prim : primitives) {
    if (const auto* s = std::get_if<Sphere>(&prim)) {
      if (!(s->radius > 0.0)) raise(Errc::invalid_input, "sphere radius must be positive");
    } else if (const auto* b = std::get_if<AxisBox>(&prim)) {
      if (!((b->max - b->min).minCoeff() > 0.0)) {
        raise(Errc::invalid_input, "box extents must be positive");
      }
    } else if (const auto* pl = std::get_if<Plane>(&prim)) {
      if (std::abs(pl->normal.norm() - 1.0) > 1e-6) {
        raise(Errc::invalid_input, "plane normal must be unit length");
      }
    }
  }
}

double primitive_sdf(const Primitive& prim, const Eigen::Vector3d& p) {
  if (const auto* s = std::get_if<Sphere>(&prim)) {
    return (p - s->center).norm() - s->radius;
  }
  if (const auto* b = std::get_if<AxisBox>(&prim)) {
    const Eigen::Vector3d center = 0.5 * (b->min + b->max);
    const Eigen::Vector3d half = 0.5 * (b->max - b->min);
    const Eigen::Vector3d q = (p - center).cwiseAbs() - half;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }
  const auto& pl = std::get<Plane>(prim);
  return pl.normal.dot(p) - pl.offset;
}

double scene_sdf(const Scene& scene, const Eigen::Vector3d& p) {
  double d = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : scene.primitives) {
    d = std::min(d, primitive_sdf(prim, p));
  }
  return d;
}

}  // namespace certmap
