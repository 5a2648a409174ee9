#pragma once

#include <cmath>
#include <vector>

#include "certmap/error.hpp"

namespace certmap {

/// Pinhole depth camera. The optical frame is the body frame: z forward,
/// x right, y down.
struct CameraModel {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  double min_depth = 0.0;
  double max_depth = 0.0;

  void validate() const {
    if (!(fx > 0) || !(fy > 0)) raise(Errc::invalid_input, "focal lengths must be positive");
    if (width < 1 || height < 1) raise(Errc::invalid_input, "image dimensions must be positive");
    if (!(min_depth > 0) || !(max_depth > min_depth)) {
      raise(Errc::invalid_input, "need 0 < min_depth < max_depth");
    }
  }
};

/// Row-major z-depth image. Pixels <= 0, NaN, or beyond max_depth are invalid.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<float> data;

  static constexpr float kInvalid = 0.0f;

  DepthImage() = default;
  DepthImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, kInvalid) {}

  float& at(int u, int v) { return data[static_cast<size_t>(v) * width + u]; }
  float at(int u, int v) const { return data[static_cast<size_t>(v) * width + u]; }

  bool valid(float depth, double max_depth) const {
    return std::isfinite(depth) && depth > 0.0f && depth <= max_depth;
  }
};

}  // namespace certmap
