#include "certmap/voxel_grid.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace certmap {

VoxelGrid::VoxelGrid(const Eigen::Vector3d& origin_, double resolution_,
                     const Eigen::Vector3i& dims_)
    : origin(origin_), resolution(resolution_), dims(dims_) {
  if (!(resolution > 0.0)) raise(Errc::invalid_input, "voxel resolution must be positive");
  if ((dims.array() < 1).any()) raise(Errc::invalid_input, "grid dims must be positive");
  const size_t n = static_cast<size_t>(num_voxels());
  tsdf.assign(n, 0.0f);
  tsdf_weight.assign(n, 0.0f);
  esdf.assign(n, std::numeric_limits<float>::quiet_NaN());
  correction.assign(n, 0.0f);
  observed.assign(n, 0);
}

void save_grid(const VoxelGrid& grid, const std::string& path) {
  std::FILE* out = std::fopen(path.c_str(), "wb");
  if (!out) raise(Errc::io_error, "cannot write grid snapshot: " + path);
  std::fprintf(out, "certmap-grid 1\n");
  std::fprintf(out, "origin %.17g %.17g %.17g\n", grid.origin.x(), grid.origin.y(),
               grid.origin.z());
  std::fprintf(out, "resolution %.17g\n", grid.resolution);
  std::fprintf(out, "dims %d %d %d\n", grid.dims.x(), grid.dims.y(), grid.dims.z());
  std::fprintf(out, "layout tsdf:f32 esdf:f32 correction:f32 observed:u8 order:x-fastest\n");
  std::fprintf(out, "data\n");
  const std::int64_t n = grid.num_voxels();
  for (std::int64_t i = 0; i < n; ++i) {
    float rec[3] = {grid.tsdf[static_cast<size_t>(i)], grid.esdf[static_cast<size_t>(i)],
                    grid.correction[static_cast<size_t>(i)]};
    std::fwrite(rec, sizeof(float), 3, out);
    std::fwrite(&grid.observed[static_cast<size_t>(i)], 1, 1, out);
  }
  std::fclose(out);
}

VoxelGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io_error, "cannot open grid snapshot: " + path);

  auto fail = [&](const std::string& why) {
    raise(Errc::io_error, "bad grid snapshot " + path + ": " + why);
  };

  std::string line;
  if (!std::getline(in, line) || line != "certmap-grid 1") fail("missing magic header");

  Eigen::Vector3d origin;
  double resolution = 0.0;
  Eigen::Vector3i dims = Eigen::Vector3i::Zero();
  while (std::getline(in, line)) {
    if (line == "data") break;
    std::istringstream row(line);
    std::string key;
    row >> key;
    if (key == "origin") {
      row >> origin.x() >> origin.y() >> origin.z();
    } else if (key == "resolution") {
      row >> resolution;
    } else if (key == "dims") {
      row >> dims.x() >> dims.y() >> dims.z();
    } else if (key == "layout") {
      // fixed layout, informational
    } else {
      fail("unknown header field: " + key);
    }
    if (!row) fail("malformed header field: " + key);
  }
  if (!(resolution > 0.0) || (dims.array() < 1).any()) fail("incomplete header");

  VoxelGrid grid(origin, resolution, dims);
  const std::int64_t n = grid.num_voxels();
  for (std::int64_t i = 0; i < n; ++i) {
    float rec[3];
    std::uint8_t obs;
    in.read(reinterpret_cast<char*>(rec), sizeof(rec));
    in.read(reinterpret_cast<char*>(&obs), 1);
    if (!in) fail("truncated voxel data");
    grid.tsdf[static_cast<size_t>(i)] = rec[0];
    grid.esdf[static_cast<size_t>(i)] = rec[1];
    grid.correction[static_cast<size_t>(i)] = rec[2];
    grid.observed[static_cast<size_t>(i)] = obs;
  }
  return grid;
}

void write_z_slice_csv(const VoxelGrid& grid, double z, const std::string& path) {
  const int zi = std::clamp(
      static_cast<int>(std::floor((z - grid.origin.z()) / grid.resolution)), 0, grid.dims.z() - 1);
  std::FILE* out = std::fopen(path.c_str(), "w");
  if (!out) raise(Errc::io_error, "cannot write slice csv: " + path);
  std::fprintf(out, "x,y,esdf,correction,certified\n");
  const double margin = 0.5 * std::sqrt(3.0) * grid.resolution;
  for (int y = 0; y < grid.dims.y(); ++y) {
    for (int x = 0; x < grid.dims.x(); ++x) {
      const std::int64_t i = grid.index(x, y, zi);
      const Eigen::Vector3d c = grid.center(x, y, zi);
      const float e = grid.esdf[static_cast<size_t>(i)];
      const float corr = grid.correction[static_cast<size_t>(i)];
      const double certified = static_cast<double>(e) - corr - margin;
      std::fprintf(out, "%.17g,%.17g,%.9g,%.9g,%.9g\n", c.x(), c.y(), static_cast<double>(e),
                   static_cast<double>(corr), certified);
    }
  }
  std::fclose(out);
}

}  // namespace certmap
