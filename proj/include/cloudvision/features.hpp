#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "cloudvision/geometry.hpp"
#include "cloudvision/image.hpp"

namespace cloudvision {

/// Standardized intensity, x-gradient, y-gradient.
inline constexpr int kFeatureChannels = 3;

using FeatureVec = Eigen::Matrix<double, kFeatureChannels, 1>;
using FeatureGrad = Eigen::Matrix<double, kFeatureChannels, 2>;

struct FeatureLevel {
  int scale = 1;  // power-of-two divisor relative to the input image
  int width = 0;
  int height = 0;
  std::vector<float> data;  // pixel-interleaved, kFeatureChannels per pixel

  float value(int c, int x, int y) const {
    return data[(static_cast<std::size_t>(y) * width + x) * kFeatureChannels + c];
  }
  float& value(int c, int x, int y) {
    return data[(static_cast<std::size_t>(y) * width + x) * kFeatureChannels + c];
  }
};

/// Levels ordered coarse to fine; levels.back() has scale 1.
struct FeaturePyramid {
  std::vector<FeatureLevel> levels;
};

struct PyramidOptions {
  int levels = 3;
  double sigma = 1.0;
  bool standardize = true;
};

/// Throws ImageTooSmall when either dimension is below 2^(levels-1) and
/// InvalidSpec for levels < 1 or sigma <= 0.
FeaturePyramid build_pyramid(const ImageF& image, const PyramidOptions& options = {});

struct FeatureSample {
  FeatureVec f;
  FeatureGrad grad;  // d f / d(u, v)
};

/// Bilinear sample with its analytic gradient. Returns nullopt when uv lies
/// outside [1, width-2] x [1, height-2]; such points are dropped by callers.
std::optional<FeatureSample> sample(const FeatureLevel& level, const Vector2& uv);

/// Value-only variant of sample().
std::optional<FeatureVec> sample_value(const FeatureLevel& level, const Vector2& uv);

inline bool in_sampling_bounds(const FeatureLevel& level, const Vector2& uv) {
  return uv.x() >= 1.0 && uv.y() >= 1.0 && uv.x() <= level.width - 2 && uv.y() <= level.height - 2;
}

}  // namespace cloudvision
