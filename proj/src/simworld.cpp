#include "certmap/simworld.hpp"

#include <algorithm>
#include <cmath>

#include "certmap/rng.hpp"

namespace certmap {

namespace {

constexpr double kTraceTol = 1e-4;    // surface hit threshold, meters
constexpr double kTraceStep = 0.9;    // conservative step scale near box edges
constexpr int kTraceMaxSteps = 256;

// Distance along `dir` (unit) from `origin` to the first surface hit, or a
// negative value on a miss. `t_max` caps the march.
double sphere_trace(const Scene& scene, const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                    double t_max) {
  double t = 0.0;
  for (int step = 0; step < kTraceMaxSteps && t <= t_max; ++step) {
    const double d = scene_sdf(scene, origin + t * dir);
    if (d < kTraceTol) return t;
    t += kTraceStep * d;
  }
  return -1.0;
}

UnitQuaternion slerp(const UnitQuaternion& a, const UnitQuaternion& b, double s) {
  Eigen::Vector4d qa = a.coeffs();
  Eigen::Vector4d qb = b.coeffs();
  double dot = qa.dot(qb);
  if (dot < 0.0) {  // take the short arc
    qb = -qb;
    dot = -dot;
  }
  if (dot > 1.0 - 1e-10) {
    return UnitQuaternion::from_coeffs((1.0 - s) * qa + s * qb);
  }
  const double omega = std::acos(std::clamp(dot, -1.0, 1.0));
  const double sin_omega = std::sin(omega);
  const Eigen::Vector4d q =
      (std::sin((1.0 - s) * omega) * qa + std::sin(s * omega) * qb) / sin_omega;
  return UnitQuaternion::from_coeffs(q);
}

}  // namespace

void Trajectory::validate() const {
  if (keyframes.empty()) raise(Errc::invalid_input, "trajectory needs at least one keyframe");
  if (!(frame_rate > 0.0)) raise(Errc::invalid_input, "frame rate must be positive");
  for (size_t k = 1; k < keyframes.size(); ++k) {
    if (!(keyframes[k].time > keyframes[k - 1].time)) {
      raise(Errc::invalid_input, "keyframe times must be strictly increasing");
    }
  }
}

RotoTranslation Trajectory::pose_at(double time) const {
  if (time <= keyframes.front().time) return keyframes.front().pose;
  if (time >= keyframes.back().time) return keyframes.back().pose;
  size_t hi = 1;
  while (keyframes[hi].time < time) ++hi;
  const TrajectoryKeyframe& k0 = keyframes[hi - 1];
  const TrajectoryKeyframe& k1 = keyframes[hi];
  const double s = (time - k0.time) / (k1.time - k0.time);

  RotoTranslation out;
  out.translation = (1.0 - s) * k0.pose.translation + s * k1.pose.translation;
  out.rotation = quat_to_rotation(
      slerp(rotation_to_quat(k0.pose.rotation), rotation_to_quat(k1.pose.rotation), s));
  return out;
}

void SensorNoiseModel::validate() const {
  if (delta_fraction < 0.0) raise(Errc::invalid_input, "delta_fraction must be >= 0");
  if (!(delta_floor > 0.0)) raise(Errc::invalid_input, "delta_floor must be > 0");
  if (outlier_rate < 0.0 || outlier_rate >= 1.0) {
    raise(Errc::invalid_input, "outlier_rate must be in [0, 1)");
  }
  if (!(outlier_magnitude > 0.0)) raise(Errc::invalid_input, "outlier_magnitude must be > 0");
}

double SensorNoiseModel::bound_for_range(double range) const {
  return std::max(delta_fraction * range, delta_floor);
}

DepthImage render_depth(const Scene& scene, const CameraModel& cam, const RotoTranslation& pose) {
  scene.validate();
  cam.validate();
  DepthImage img(cam.width, cam.height);

  const Eigen::Matrix3d r = pose.rotation.matrix();
  const Eigen::Vector3d origin = pose.translation;

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8)
#endif
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      Eigen::Vector3d dir_cam((u + 0.5 - cam.cx) / cam.fx, (v + 0.5 - cam.cy) / cam.fy, 1.0);
      const double z_scale = 1.0 / dir_cam.norm();  // z-depth per unit ray length
      dir_cam *= z_scale;
      // March up to the ray length at which z-depth reaches max_depth.
      const double t_max = cam.max_depth / z_scale;
      const double t = sphere_trace(scene, origin, r * dir_cam, t_max);
      if (t < 0.0) continue;
      const double depth = t * z_scale;
      if (depth > cam.max_depth) continue;
      img.at(u, v) = static_cast<float>(depth);
    }
  }
  return img;
}

namespace {

// A surface point is usable only if the march from the camera center reaches
// it without hitting anything nearer.
bool visible_from(const Scene& scene, const Eigen::Vector3d& cam_origin, const Eigen::Vector3d& p,
                  const CameraModel& cam, const RotoTranslation& pose) {
  const Eigen::Vector3d p_body = transform_point(invert(pose), p);
  if (p_body.z() < cam.min_depth || p_body.z() > cam.max_depth) return false;
  const double u = cam.fx * p_body.x() / p_body.z() + cam.cx;
  const double v = cam.fy * p_body.y() / p_body.z() + cam.cy;
  if (u < 0.0 || u >= cam.width || v < 0.0 || v >= cam.height) return false;

  const double dist = (p - cam_origin).norm();
  if (dist < 1e-6) return false;
  const double t = sphere_trace(scene, cam_origin, (p - cam_origin) / dist, dist + 0.1);
  return t >= 0.0 && std::abs(t - dist) < 5e-3;
}

}  // namespace

GeneratedCorrespondences generate_correspondences(const Scene& scene, const CameraModel& cam,
                                                  const RotoTranslation& pose_a,
                                                  const RotoTranslation& pose_b, int count,
                                                  const SensorNoiseModel& noise) {
  scene.validate();
  cam.validate();
  noise.validate();
  if (count < 4) raise(Errc::invalid_input, "need at least 4 correspondences");

  Rng rng(noise.rng_seed);
  GeneratedCorrespondences out;
  out.ground_truth = compose(invert(pose_b), pose_a);  // b = gt(a)

  const Eigen::Matrix3d r_a = pose_a.rotation.matrix();
  const Eigen::Vector3d origin_a = pose_a.translation;
  const Eigen::Vector3d origin_b = pose_b.translation;

  const long max_attempts = 200L * count;
  long attempts = 0;
  while (out.set.size() < count && attempts < max_attempts) {
    ++attempts;
    // Cast through a random pixel of camera a to land on a surface point.
    const double u = rng.uniform(0.0, static_cast<double>(cam.width));
    const double v = rng.uniform(0.0, static_cast<double>(cam.height));
    Eigen::Vector3d dir_cam((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
    const double z_scale = 1.0 / dir_cam.norm();
    dir_cam *= z_scale;
    const double t = sphere_trace(scene, origin_a, r_a * dir_cam, cam.max_depth / z_scale);
    if (t < 0.0) continue;
    const double depth = t * z_scale;
    if (depth < cam.min_depth || depth > cam.max_depth) continue;
    const Eigen::Vector3d p = origin_a + t * (r_a * dir_cam);
    if (!visible_from(scene, origin_b, p, cam, pose_b)) continue;

    const Eigen::Vector3d a_true = transform_point(invert(pose_a), p);
    const Eigen::Vector3d b_true = transform_point(invert(pose_b), p);

    // Noise bounds come from the true ranges; both frames' noise is folded
    // into b so the set matches the single-sided measurement model.
    const double bound_a = noise.bound_for_range(a_true.norm());
    const double bound_b = noise.bound_for_range(b_true.norm());
    const Eigen::Vector3d noise_a =
        noise.delta_fraction > 0.0 ? (rng.uniform01() * bound_a * rng.unit_vector3()).eval()
                                   : Eigen::Vector3d::Zero().eval();
    const Eigen::Vector3d noise_b =
        noise.delta_fraction > 0.0 ? (rng.uniform01() * bound_b * rng.unit_vector3()).eval()
                                   : Eigen::Vector3d::Zero().eval();

    out.set.a.push_back(a_true + noise_a);
    out.set.b.push_back(b_true + noise_b);
    out.set.delta.push_back(bound_a + bound_b);
  }

  if (out.set.size() < count) {
    raise(Errc::insufficient_features, "not enough co-visible surface points");
  }

  // Model check by direct substitution before any outliers go in.
  const Eigen::Matrix3d r_gt = out.ground_truth.rotation.matrix();
  for (int i = 0; i < count; ++i) {
    const double err =
        (out.set.b[static_cast<size_t>(i)] - r_gt * out.set.a[static_cast<size_t>(i)] -
         out.ground_truth.translation)
            .norm();
    if (err > out.set.delta[static_cast<size_t>(i)] + 1e-12) {
      raise(Errc::invalid_input, "generated inlier violates its noise bound");
    }
  }

  const int num_outliers = static_cast<int>(noise.outlier_rate * count);
  if (num_outliers > 0) {
    std::vector<int> order(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) order[static_cast<size_t>(i)] = i;
    for (int i = count - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    out.outlier_indices.assign(order.begin(), order.begin() + num_outliers);
    std::sort(out.outlier_indices.begin(), out.outlier_indices.end());
    for (int idx : out.outlier_indices) {
      out.set.b[static_cast<size_t>(idx)] += noise.outlier_magnitude * rng.unit_vector3();
    }
  }
  return out;
}

}  // namespace certmap
