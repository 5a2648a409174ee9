#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "certmap/error.hpp"

namespace certmap {

/// Dense fixed-extent voxel map, x-fastest storage. Holds the fused truncated
/// distance, the propagated Euclidean distance, and the cumulative deflation
/// correction per voxel. Unobserved voxels carry esdf = NaN.
struct VoxelGrid {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();  // corner of voxel (0,0,0)
  double resolution = 0.05;                          // meters per voxel
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();

  std::vector<float> tsdf;
  std::vector<float> tsdf_weight;
  std::vector<float> esdf;
  std::vector<float> correction;
  std::vector<std::uint8_t> observed;

  static constexpr float kWeightCap = 100.0f;

  VoxelGrid() = default;
  VoxelGrid(const Eigen::Vector3d& origin_, double resolution_, const Eigen::Vector3i& dims_);

  double truncation() const { return 4.0 * resolution; }
  std::int64_t num_voxels() const {
    return static_cast<std::int64_t>(dims.x()) * dims.y() * dims.z();
  }
  std::int64_t index(int x, int y, int z) const {
    return x + static_cast<std::int64_t>(dims.x()) * (y + static_cast<std::int64_t>(dims.y()) * z);
  }
  Eigen::Vector3d center(int x, int y, int z) const {
    return origin + resolution * Eigen::Vector3d(x + 0.5, y + 0.5, z + 0.5);
  }
  bool contains(const Eigen::Vector3i& v) const {
    return (v.array() >= 0).all() && (v.array() < dims.array()).all();
  }
  /// Voxel containing a map-frame point; may be out of bounds.
  Eigen::Vector3i voxel_of(const Eigen::Vector3d& p) const {
    const Eigen::Vector3d g = (p - origin) / resolution;
    return Eigen::Vector3i(static_cast<int>(std::floor(g.x())), static_cast<int>(std::floor(g.y())),
                           static_cast<int>(std::floor(g.z())));
  }
  double diagonal() const { return resolution * dims.cast<double>().norm(); }
};

/// Self-describing snapshot: text header, then per voxel (x-fastest)
/// little-endian float32 tsdf, esdf, correction and uint8 observed.
void save_grid(const VoxelGrid& grid, const std::string& path);
VoxelGrid load_grid(const std::string& path);

/// One z-layer as CSV rows (x, y, esdf, correction, certified) at voxel
/// centers, where certified = esdf - correction - sqrt(3)/2 * resolution.
void write_z_slice_csv(const VoxelGrid& grid, double z, const std::string& path);

}  // namespace certmap
