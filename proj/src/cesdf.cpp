#include "certmap/cesdf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace certmap {

namespace {

struct IndexBox {
  Eigen::Vector3i lo, hi;  // inclusive
  bool empty = false;
};

// Voxel index range that can contain the camera frustum: AABB of the camera
// origin and the four far-plane corners, in map frame.
IndexBox frustum_box(const VoxelGrid& grid, const CameraModel& cam, const RotoTranslation& pose) {
  Eigen::Vector3d pts[5];
  pts[0] = pose.translation;
  int k = 1;
  for (double u : {0.0, static_cast<double>(cam.width)}) {
    for (double v : {0.0, static_cast<double>(cam.height)}) {
      const Eigen::Vector3d corner((u - cam.cx) / cam.fx * cam.max_depth,
                                   (v - cam.cy) / cam.fy * cam.max_depth, cam.max_depth);
      pts[k++] = transform_point(pose, corner);
    }
  }
  Eigen::Vector3d lo = pts[0], hi = pts[0];
  for (int i = 1; i < 5; ++i) {
    lo = lo.cwiseMin(pts[i]);
    hi = hi.cwiseMax(pts[i]);
  }
  IndexBox box;
  const Eigen::Vector3i vlo = grid.voxel_of(lo);
  const Eigen::Vector3i vhi = grid.voxel_of(hi);
  box.lo = vlo.cwiseMax(Eigen::Vector3i::Zero());
  box.hi = vhi.cwiseMin(grid.dims - Eigen::Vector3i::Ones());
  box.empty = (box.lo.array() > box.hi.array()).any();
  return box;
}

}  // namespace

void integrate_depth(VoxelGrid& grid, const DepthImage& depth, const CameraModel& cam,
                     const RotoTranslation& pose) {
  cam.validate();
  if (depth.width != cam.width || depth.height != cam.height) {
    raise(Errc::invalid_input, "depth image dimensions do not match the camera");
  }
  const IndexBox box = frustum_box(grid, cam, pose);
  if (box.empty) return;

  const RotoTranslation inv_pose = invert(pose);
  const Eigen::Matrix3d r = inv_pose.rotation.matrix();
  const Eigen::Vector3d t = inv_pose.translation;
  const float trunc = static_cast<float>(grid.truncation());

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
  for (int z = box.lo.z(); z <= box.hi.z(); ++z) {
    for (int y = box.lo.y(); y <= box.hi.y(); ++y) {
      for (int x = box.lo.x(); x <= box.hi.x(); ++x) {
        const Eigen::Vector3d p_body = r * grid.center(x, y, z) + t;
        if (p_body.z() < cam.min_depth || p_body.z() > cam.max_depth) continue;
        const double inv_z = 1.0 / p_body.z();
        const int u = static_cast<int>(cam.fx * p_body.x() * inv_z + cam.cx);
        const int v = static_cast<int>(cam.fy * p_body.y() * inv_z + cam.cy);
        if (u < 0 || u >= cam.width || v < 0 || v >= cam.height) continue;
        const float measured = depth.at(u, v);
        if (!depth.valid(measured, cam.max_depth)) continue;

        const float sd = measured - static_cast<float>(p_body.z());
        if (sd < -trunc) continue;  // beyond the truncation band behind the surface
        const float clamped = std::min(sd, trunc);

        const std::int64_t i = grid.index(x, y, z);
        const float w = grid.tsdf_weight[static_cast<size_t>(i)];
        grid.tsdf[static_cast<size_t>(i)] =
            (grid.tsdf[static_cast<size_t>(i)] * w + clamped) / (w + 1.0f);
        grid.tsdf_weight[static_cast<size_t>(i)] = std::min(w + 1.0f, VoxelGrid::kWeightCap);
      }
    }
  }
}

void deflate(VoxelGrid& grid, const MapPoseEstimate& est) {
  if (est.epsilon_r < 0.0 || est.epsilon_t < 0.0) {
    raise(Errc::invalid_input, "error bounds must be nonnegative");
  }
  // || p_body - delta.t || is rotation-invariant, so it can be evaluated in
  // the map frame against the previous body origin expressed in the map.
  const Eigen::Vector3d anchor = transform_point(est.pose, est.delta.translation);
  const double eps_r = est.epsilon_r;
  const double eps_t = est.epsilon_t;

  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  const double res = grid.resolution;
  const Eigen::Vector3d base = grid.origin + 0.5 * res * Eigen::Vector3d::Ones();

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      const double dz = base.z() + res * z - anchor.z();
      const double dy = base.y() + res * y - anchor.y();
      const double dyz = dy * dy + dz * dz;
      float* row = grid.correction.data() + grid.index(0, y, z);
      for (int x = 0; x < nx; ++x) {
        const double dx = base.x() + res * x - anchor.x();
        row[x] += static_cast<float>(eps_r * std::sqrt(dx * dx + dyz) + eps_t);
      }
    }
  }
}

void reset_corrections_in_fov(VoxelGrid& grid, const CameraModel& cam,
                              const RotoTranslation& pose, const DepthImage& depth) {
  cam.validate();
  if (depth.width != cam.width || depth.height != cam.height) {
    raise(Errc::invalid_input, "depth image dimensions do not match the camera");
  }
  const IndexBox box = frustum_box(grid, cam, pose);
  if (box.empty) return;

  const RotoTranslation inv_pose = invert(pose);
  const Eigen::Matrix3d r = inv_pose.rotation.matrix();
  const Eigen::Vector3d t = inv_pose.translation;
  const double trunc = grid.truncation();

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
  for (int z = box.lo.z(); z <= box.hi.z(); ++z) {
    for (int y = box.lo.y(); y <= box.hi.y(); ++y) {
      for (int x = box.lo.x(); x <= box.hi.x(); ++x) {
        const Eigen::Vector3d p_body = r * grid.center(x, y, z) + t;
        if (p_body.z() < cam.min_depth || p_body.z() > cam.max_depth) continue;
        const double inv_z = 1.0 / p_body.z();
        const int u = static_cast<int>(cam.fx * p_body.x() * inv_z + cam.cx);
        const int v = static_cast<int>(cam.fy * p_body.y() * inv_z + cam.cy);
        if (u < 0 || u >= cam.width || v < 0 || v >= cam.height) continue;
        const float measured = depth.at(u, v);
        if (!depth.valid(measured, cam.max_depth)) continue;
        // Occlusion: the voxel was actually observed only if it sits in front
        // of (or within one truncation of) the measured surface.
        if (p_body.z() > measured + trunc) continue;

        const std::int64_t i = grid.index(x, y, z);
        grid.correction[static_cast<size_t>(i)] = 0.0f;
        grid.observed[static_cast<size_t>(i)] = 1;
      }
    }
  }
}

namespace {

constexpr std::int32_t kDistInf = std::numeric_limits<std::int32_t>::max() / 4;

// Exact 1D squared-distance transform (lower envelope of parabolas) on
// integer heights. `f` and `out` are length n; kDistInf marks empty cells.
void edt_1d(const std::int32_t* f, std::int32_t* out, int n, int* vtx, double* zint) {
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kDistInf) continue;
    const double fq = static_cast<double>(f[q]) + static_cast<double>(q) * q;
    while (k >= 0) {
      const int p = vtx[k];
      const double fp = static_cast<double>(f[p]) + static_cast<double>(p) * p;
      const double s = (fq - fp) / (2.0 * (q - p));
      if (k >= 1 && s <= zint[k]) {
        --k;
      } else {
        ++k;
        vtx[k] = q;
        zint[k] = (k == 0) ? -std::numeric_limits<double>::infinity() : s;
        break;
      }
    }
    if (k < 0) {
      k = 0;
      vtx[0] = q;
      zint[0] = -std::numeric_limits<double>::infinity();
    }
  }
  if (k < 0) {
    std::fill(out, out + n, kDistInf);
    return;
  }
  int idx = 0;
  for (int q = 0; q < n; ++q) {
    while (idx < k && zint[idx + 1] < static_cast<double>(q)) ++idx;
    const int p = vtx[idx];
    const std::int64_t dq = q - p;
    out[q] = static_cast<std::int32_t>(f[p] + dq * dq);
  }
}

}  // namespace

void propagate_esdf(VoxelGrid& grid) {
  const int nx = grid.dims.x(), ny = grid.dims.y(), nz = grid.dims.z();
  const std::int64_t n = grid.num_voxels();

  bool any_observed = false;
  for (std::int64_t i = 0; i < n && !any_observed; ++i) any_observed = grid.observed[i] != 0;
  if (!any_observed) return;

  // Surface set: fused voxels at or below zero, plus fused positive voxels
  // with a nonpositive 26-neighbor (the free-side shell).
  std::vector<std::int32_t> dist_sq(static_cast<size_t>(n), kDistInf);
  bool any_surface = false;
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static) reduction(|| : any_surface)
#endif
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        const std::int64_t i = grid.index(x, y, z);
        if (!grid.observed[static_cast<size_t>(i)] ||
            grid.tsdf_weight[static_cast<size_t>(i)] <= 0.0f) {
          continue;
        }
        bool surface = grid.tsdf[static_cast<size_t>(i)] <= 0.0f;
        if (!surface) {
          for (int dz = -1; dz <= 1 && !surface; ++dz) {
            for (int dy = -1; dy <= 1 && !surface; ++dy) {
              for (int dx = -1; dx <= 1 && !surface; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                const int xx = x + dx, yy = y + dy, zz = z + dz;
                if (xx < 0 || xx >= nx || yy < 0 || yy >= ny || zz < 0 || zz >= nz) continue;
                const std::int64_t j = grid.index(xx, yy, zz);
                surface = grid.tsdf_weight[static_cast<size_t>(j)] > 0.0f &&
                          grid.tsdf[static_cast<size_t>(j)] <= 0.0f;
              }
            }
          }
        }
        if (surface) {
          dist_sq[static_cast<size_t>(i)] = 0;
          any_surface = true;
        }
      }
    }
  }

  if (!any_surface) {
    const float diag = static_cast<float>(grid.diagonal());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
      grid.esdf[static_cast<size_t>(i)] =
          grid.observed[static_cast<size_t>(i)] ? diag : std::numeric_limits<float>::quiet_NaN();
    }
    return;
  }

  // Separable exact EDT, one dimension at a time.
  {
    // x: simple two-scan nearest-seed distance per row.
#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
    for (int z = 0; z < nz; ++z) {
      for (int y = 0; y < ny; ++y) {
        std::int32_t* row = dist_sq.data() + grid.index(0, y, z);
        std::int32_t run = kDistInf;
        for (int x = 0; x < nx; ++x) {
          run = (row[x] == 0) ? 0 : (run >= kDistInf ? kDistInf : run + 1);
          row[x] = run;
        }
        run = kDistInf;
        for (int x = nx - 1; x >= 0; --x) {
          run = (row[x] == 0) ? 0 : (run >= kDistInf ? kDistInf : run + 1);
          if (run < row[x]) row[x] = run;
        }
        for (int x = 0; x < nx; ++x) {
          if (row[x] < kDistInf) row[x] *= row[x];
        }
      }
    }
  }

  const int max_dim = std::max(ny, nz);
  std::vector<std::int32_t> fbuf(static_cast<size_t>(max_dim));
  std::vector<std::int32_t> obuf(static_cast<size_t>(max_dim));
  std::vector<int> vtx(static_cast<size_t>(max_dim));
  std::vector<double> zint(static_cast<size_t>(max_dim));

  for (int z = 0; z < nz; ++z) {  // y direction
    for (int x = 0; x < nx; ++x) {
      for (int y = 0; y < ny; ++y) fbuf[static_cast<size_t>(y)] = dist_sq[static_cast<size_t>(grid.index(x, y, z))];
      edt_1d(fbuf.data(), obuf.data(), ny, vtx.data(), zint.data());
      for (int y = 0; y < ny; ++y) dist_sq[static_cast<size_t>(grid.index(x, y, z))] = obuf[static_cast<size_t>(y)];
    }
  }
  for (int y = 0; y < ny; ++y) {  // z direction
    for (int x = 0; x < nx; ++x) {
      for (int z = 0; z < nz; ++z) fbuf[static_cast<size_t>(z)] = dist_sq[static_cast<size_t>(grid.index(x, y, z))];
      edt_1d(fbuf.data(), obuf.data(), nz, vtx.data(), zint.data());
      for (int z = 0; z < nz; ++z) dist_sq[static_cast<size_t>(grid.index(x, y, z))] = obuf[static_cast<size_t>(z)];
    }
  }

  const float res = static_cast<float>(grid.resolution);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < n; ++i) {
    if (!grid.observed[static_cast<size_t>(i)]) {
      grid.esdf[static_cast<size_t>(i)] = std::numeric_limits<float>::quiet_NaN();
    } else {
      grid.esdf[static_cast<size_t>(i)] =
          static_cast<float>(std::sqrt(static_cast<double>(dist_sq[static_cast<size_t>(i)]))) * res;
    }
  }
}

std::optional<double> certified_distance(const VoxelGrid& grid, const RotoTranslation& pose,
                                         const Eigen::Vector3d& p_body) {
  const Eigen::Vector3d p_map = transform_point(pose, p_body);
  const Eigen::Vector3i v = grid.voxel_of(p_map);
  if (!grid.contains(v)) return std::nullopt;
  const std::int64_t i = grid.index(v.x(), v.y(), v.z());
  if (!grid.observed[static_cast<size_t>(i)]) return std::nullopt;
  const float e = grid.esdf[static_cast<size_t>(i)];
  if (!std::isfinite(e)) return std::nullopt;  // observed but not yet propagated
  const double margin = 0.5 * std::sqrt(3.0) * grid.resolution;
  return static_cast<double>(e) - grid.correction[static_cast<size_t>(i)] - margin;
}

void step_frame(VoxelGrid& grid, const DepthImage& depth, const CameraModel& cam,
                const RegistrationResult& reg, MappingState& state) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  RotoTranslation delta;
  delta.rotation = reg.rotation_estimate;
  delta.translation = reg.translation_estimate;

  state.pose = compose(state.pose, invert(delta));
  state.frame += 1;
  state.last_timings = StageTimings{};

  auto t0 = clock::now();
  integrate_depth(grid, depth, cam, state.pose);
  const double integrate_only_ms = ms_since(t0);

  t0 = clock::now();
  if (state.deflation_enabled) {
    deflate(grid, MapPoseEstimate{state.pose, delta, reg.epsilon_r, reg.epsilon_t});
  }
  state.last_timings.deflate_ms = ms_since(t0);

  t0 = clock::now();
  reset_corrections_in_fov(grid, cam, state.pose, depth);
  state.last_timings.integrate_ms = integrate_only_ms + ms_since(t0);

  t0 = clock::now();
  if (state.esdf_period_frames > 0 && state.frame % state.esdf_period_frames == 0) {
    propagate_esdf(grid);
  }
  state.last_timings.propagate_ms = ms_since(t0);
}

}  // namespace certmap
