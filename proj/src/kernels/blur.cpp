#include <cmath>

#include "cloudvision/kernels.hpp"

namespace cloudvision::kernels {

namespace {

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

void blur_row(const ImageF& in, ImageF& out, const std::vector<double>& taps, int y) {
  const int r = static_cast<int>(taps.size()) / 2;
  for (int x = 0; x < in.width; ++x) {
    double acc = 0.0;
    for (int k = -r; k <= r; ++k) acc += taps[k + r] * in(reflect(x + k, in.width), y);
    out(x, y) = static_cast<float>(acc);
  }
}

void blur_column_row(const ImageF& in, ImageF& out, const std::vector<double>& taps, int y) {
  const int r = static_cast<int>(taps.size()) / 2;
  for (int x = 0; x < in.width; ++x) {
    double acc = 0.0;
    for (int k = -r; k <= r; ++k) acc += taps[k + r] * in(x, reflect(y + k, in.height));
    out(x, y) = static_cast<float>(acc);
  }
}

}  // namespace

std::vector<double> gaussian_taps(double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(2 * r + 1);
  double sum = 0.0;
  for (int k = -r; k <= r; ++k) {
    taps[k + r] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += taps[k + r];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

ImageF gaussian_blur(const ImageF& in, double sigma) {
  const auto taps = gaussian_taps(sigma);
  ImageF tmp(in.width, in.height);
  ImageF out(in.width, in.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.height; ++y) blur_row(in, tmp, taps, y);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.height; ++y) blur_column_row(tmp, out, taps, y);
  return out;
}

namespace serial {

ImageF gaussian_blur(const ImageF& in, double sigma) {
  const auto taps = gaussian_taps(sigma);
  ImageF tmp(in.width, in.height);
  ImageF out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) blur_row(in, tmp, taps, y);
  for (int y = 0; y < in.height; ++y) blur_column_row(tmp, out, taps, y);
  return out;
}

}  // namespace serial
}  // namespace cloudvision::kernels
