#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace cloudvision {

/// Row-major single-channel image.
template <typename T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  T& operator()(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  const T& operator()(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  bool empty() const { return data.empty(); }

  friend bool operator==(const Image&, const Image&) = default;
};

using Image8 = Image<std::uint8_t>;
using ImageF = Image<float>;

ImageF to_float(const Image8& img);

struct PgmFile {
  Image8 image;
  /// From a "# timestamp <seconds>" header comment, when present.
  std::optional<double> timestamp;
};

/// Binary 8-bit PGM (P5) with maxval 255.
PgmFile read_pgm(const std::filesystem::path& path);
void write_pgm(const Image8& img, const std::filesystem::path& path,
               std::optional<double> timestamp = std::nullopt);

}  // namespace cloudvision
