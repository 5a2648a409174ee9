#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "certmap/camera.hpp"
#include "certmap/registration.hpp"
#include "certmap/scene.hpp"
#include "certmap/simworld.hpp"
#include "certmap/voxel_grid.hpp"

namespace certmap {

/// Everything a run needs, loaded from one YAML file: the analytic scene,
/// the camera path, the sensor model, grid extents, and solver settings.
struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  double frame_rate = 30.0;
  double duration = 1.0;  // seconds

  CameraModel camera;
  Scene scene;
  Trajectory trajectory;
  SensorNoiseModel noise;
  int feature_count = 300;

  Eigen::Vector3d grid_origin = Eigen::Vector3d::Zero();
  double grid_resolution = 0.05;
  Eigen::Vector3i grid_dims = Eigen::Vector3i::Zero();

  double esdf_period = 0.2;  // seconds between distance propagations
  double graph_fraction = 0.05;
  int bound_iterations = 1000;
  GncConfig gnc;
  bool deflation = true;
  std::vector<double> slice_z;  // z levels exported as CSV slices

  void validate() const;
};

/// Parses and validates; parse errors carry the YAML line number.
Scenario load_scenario(const std::string& path);

}  // namespace certmap
