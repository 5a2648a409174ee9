#pragma once

#include <optional>

#include "certmap/camera.hpp"
#include "certmap/geom.hpp"
#include "certmap/registration.hpp"
#include "certmap/voxel_grid.hpp"

namespace certmap {

/// Pose bookkeeping for one deflation step: the (post-update) estimated
/// body->map pose for frame k+1, the estimated frame-k -> frame-k+1 delta,
/// and that delta's error bounds.
struct MapPoseEstimate {
  RotoTranslation pose;   // estimated B_{k+1} -> M
  RotoTranslation delta;  // estimated B_k -> B_{k+1}
  double epsilon_r = 0.0;
  double epsilon_t = 0.0;
};

/// Projective TSDF fusion of one depth image taken from `pose` (body -> map).
/// Weighted running average per voxel, per-update weight 1, weight capped.
/// Voxels more than one truncation behind the measured surface are left
/// untouched (they were not observed).
void integrate_depth(VoxelGrid& grid, const DepthImage& depth, const CameraModel& cam,
                     const RotoTranslation& pose);

/// Grows every voxel's correction by
///   epsilon_r * || p_body - delta.translation || + epsilon_t
/// where p_body is the voxel center expressed in the new body frame. This is
/// the worst-case distance the voxel may have shifted relative to the map
/// given the frame-to-frame estimation error.
void deflate(VoxelGrid& grid, const MapPoseEstimate& est);

/// Zeroes the correction and marks observed every voxel whose center projects
/// into the image with a valid measurement and is not occluded (voxel depth
/// <= measured + truncation). Call after integrate_depth for the same frame.
void reset_corrections_in_fov(VoxelGrid& grid, const CameraModel& cam,
                              const RotoTranslation& pose, const DepthImage& depth);

/// Full recompute of the Euclidean distance field from the current surface
/// set (voxels whose fused tsdf reaches zero or changes sign against a
/// 26-neighbor). Exact: matches brute-force nearest-surface-center distances.
/// With no surface voxels, observed voxels get the grid diagonal. Unobserved
/// voxels keep the NaN sentinel.
void propagate_esdf(VoxelGrid& grid);

/// Distance underestimate at a body-frame point queried through the estimated
/// pose: esdf - correction - (sqrt(3)/2) * resolution at the containing voxel.
/// Empty when the point leaves the grid or hits an unknown voxel.
std::optional<double> certified_distance(const VoxelGrid& grid, const RotoTranslation& pose,
                                         const Eigen::Vector3d& p_body);

struct StageTimings {
  double integrate_ms = 0.0;  // includes the in-FOV correction reset
  double deflate_ms = 0.0;
  double propagate_ms = 0.0;  // zero on frames without a propagation
};

struct MappingState {
  RotoTranslation pose;        // estimated body -> map, frame `frame`
  long frame = 0;              // completed frames
  int esdf_period_frames = 6;  // propagate every this many frames
  bool deflation_enabled = true;
  StageTimings last_timings;
};

/// One mapping frame in order: pose update from the registration delta,
/// depth integration, deflation, in-FOV correction reset, and (on schedule)
/// distance propagation.
void step_frame(VoxelGrid& grid, const DepthImage& depth, const CameraModel& cam,
                const RegistrationResult& reg, MappingState& state);

}  // namespace certmap
