#pragma once

#include <cstdint>
#include <vector>

#include "certmap/camera.hpp"
#include "certmap/correspondence.hpp"
#include "certmap/geom.hpp"
#include "certmap/scene.hpp"

namespace certmap {

struct TrajectoryKeyframe {
  double time = 0.0;            // seconds
  RotoTranslation pose;         // body -> inertial
};

/// Piecewise interpolated camera path: linear position, slerped orientation.
/// Clamped outside the keyframe range.
struct Trajectory {
  std::vector<TrajectoryKeyframe> keyframes;
  double frame_rate = 30.0;  // Hz

  void validate() const;
  RotoTranslation pose_at(double time) const;
};

/// Range-proportional noise bound with a floor, plus gross outliers.
/// delta_fraction == 0 generates exact points while still reporting the
/// floor as the bound (bounds must stay positive).
struct SensorNoiseModel {
  double delta_fraction = 0.02;   // delta_i = delta_fraction * range
  double delta_floor = 0.005;     // meters
  double outlier_rate = 0.0;      // in [0, 1)
  double outlier_magnitude = 1.0; // meters, displacement of corrupted points
  std::uint64_t rng_seed = 0;

  void validate() const;
  double bound_for_range(double range) const;
};

/// Sphere-traced z-depth render of the analytic scene. Rays that miss or hit
/// beyond max_depth give the invalid sentinel.
DepthImage render_depth(const Scene& scene, const CameraModel& cam, const RotoTranslation& pose);

struct GeneratedCorrespondences {
  CorrespondenceSet set;
  RotoTranslation ground_truth;      // maps frame-a coordinates to frame-b
  std::vector<int> outlier_indices;  // which b_i were displaced
};

/// Samples surface points visible (unoccluded) from both poses, applies
/// bounded noise on both sides folded into b with a combined two-frame bound,
/// then corrupts an outlier_rate fraction of the b points. Deterministic for
/// a given noise.rng_seed.
GeneratedCorrespondences generate_correspondences(const Scene& scene, const CameraModel& cam,
                                                  const RotoTranslation& pose_a,
                                                  const RotoTranslation& pose_b, int count,
                                                  const SensorNoiseModel& noise);

}  // namespace certmap
