#include "cloudvision/features.hpp"

#include <algorithm>
#include <cmath>

#include "cloudvision/error.hpp"
#include "cloudvision/kernels.hpp"

namespace cloudvision {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

ImageF decimate(const ImageF& in) {
  ImageF out((in.width + 1) / 2, (in.height + 1) / 2);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) out(x, y) = in(2 * x, 2 * y);
  }
  return out;
}

void standardize_channel(FeatureLevel& level, int c) {
  const std::size_t n = static_cast<std::size_t>(level.width) * level.height;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += level.data[i * kFeatureChannels + c];
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = level.data[i * kFeatureChannels + c] - mean;
    sq += d * d;
  }
  const double stddev = std::sqrt(sq / static_cast<double>(n));
  // Constant channel: leave it identically zero.
  if (stddev <= 1e-6 * (std::abs(mean) + 1.0)) {
    for (std::size_t i = 0; i < n; ++i) level.data[i * kFeatureChannels + c] = 0.0f;
    return;
  }
  const double inv = 1.0 / stddev;
  for (std::size_t i = 0; i < n; ++i) {
    float& v = level.data[i * kFeatureChannels + c];
    v = static_cast<float>((v - mean) * inv);
  }
}

FeatureLevel make_level(const ImageF& smoothed, int scale, bool standardize) {
  FeatureLevel level;
  level.scale = scale;
  level.width = smoothed.width;
  level.height = smoothed.height;
  level.data.resize(static_cast<std::size_t>(level.width) * level.height * kFeatureChannels);
  const int w = level.width;
  const int h = level.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      level.value(0, x, y) = smoothed(x, y);
      level.value(1, x, y) = 0.5f * (smoothed(reflect(x + 1, w), y) - smoothed(reflect(x - 1, w), y));
      level.value(2, x, y) = 0.5f * (smoothed(x, reflect(y + 1, h)) - smoothed(x, reflect(y - 1, h)));
    }
  }
  if (standardize) {
    for (int c = 0; c < kFeatureChannels; ++c) standardize_channel(level, c);
  }
  return level;
}

}  // namespace

FeaturePyramid build_pyramid(const ImageF& image, const PyramidOptions& options) {
  if (options.levels < 1) throw Error(ErrorCode::InvalidSpec, "pyramid needs at least one level");
  if (!(options.sigma > 0.0)) throw Error(ErrorCode::InvalidSpec, "blur sigma must be positive");
  const int min_dim = 1 << (options.levels - 1);
  if (image.width < min_dim || image.height < min_dim) {
    throw Error(ErrorCode::ImageTooSmall, "image smaller than 2^(levels-1) = " + std::to_string(min_dim));
  }

  FeaturePyramid pyr;
  pyr.levels.reserve(options.levels);
  ImageF current = image;
  for (int k = 0; k < options.levels; ++k) {
    ImageF smoothed = kernels::gaussian_blur(current, options.sigma);
    pyr.levels.push_back(make_level(smoothed, 1 << k, options.standardize));
    if (k + 1 < options.levels) current = decimate(smoothed);
  }
  std::reverse(pyr.levels.begin(), pyr.levels.end());
  return pyr;
}

std::optional<FeatureSample> sample(const FeatureLevel& level, const Vector2& uv) {
  if (!in_sampling_bounds(level, uv)) return std::nullopt;
  const int x0 = static_cast<int>(std::floor(uv.x()));
  const int y0 = static_cast<int>(std::floor(uv.y()));
  const double ax = uv.x() - x0;
  const double ay = uv.y() - y0;
  const float* p00 = &level.data[(static_cast<std::size_t>(y0) * level.width + x0) * kFeatureChannels];
  const float* p10 = p00 + kFeatureChannels;
  const float* p01 = p00 + static_cast<std::size_t>(level.width) * kFeatureChannels;
  const float* p11 = p01 + kFeatureChannels;
  FeatureSample s;
  for (int c = 0; c < kFeatureChannels; ++c) {
    const double f00 = p00[c], f10 = p10[c], f01 = p01[c], f11 = p11[c];
    s.f[c] = (1.0 - ax) * (1.0 - ay) * f00 + ax * (1.0 - ay) * f10 + (1.0 - ax) * ay * f01 + ax * ay * f11;
    s.grad(c, 0) = (1.0 - ay) * (f10 - f00) + ay * (f11 - f01);
    s.grad(c, 1) = (1.0 - ax) * (f01 - f00) + ax * (f11 - f10);
  }
  return s;
}

std::optional<FeatureVec> sample_value(const FeatureLevel& level, const Vector2& uv) {
  if (!in_sampling_bounds(level, uv)) return std::nullopt;
  const int x0 = static_cast<int>(std::floor(uv.x()));
  const int y0 = static_cast<int>(std::floor(uv.y()));
  const double ax = uv.x() - x0;
  const double ay = uv.y() - y0;
  const float* p00 = &level.data[(static_cast<std::size_t>(y0) * level.width + x0) * kFeatureChannels];
  const float* p10 = p00 + kFeatureChannels;
  const float* p01 = p00 + static_cast<std::size_t>(level.width) * kFeatureChannels;
  const float* p11 = p01 + kFeatureChannels;
  FeatureVec f;
  for (int c = 0; c < kFeatureChannels; ++c) {
    f[c] = (1.0 - ax) * (1.0 - ay) * p00[c] + ax * (1.0 - ay) * p10[c] + (1.0 - ax) * ay * p01[c] +
           ax * ay * p11[c];
  }
  return f;
}

}  // namespace cloudvision
