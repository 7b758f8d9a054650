#pragma once

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "cloudvision/geometry.hpp"

namespace cvtest {

using namespace cloudvision;

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("cvtest_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Vector3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vector3 v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Pose random_pose(std::mt19937_64& rng, double max_angle = 3.0, double max_trans = 5.0) {
  std::uniform_real_distribution<double> a(0.0, max_angle);
  std::uniform_real_distribution<double> t(-max_trans, max_trans);
  const Eigen::AngleAxisd aa(a(rng), random_unit(rng));
  return Pose(Eigen::Quaterniond(aa), Vector3(t(rng), t(rng), t(rng)));
}

/// Rotation matrix from the textbook Rodrigues formula, built without the
/// library's exponential map.
inline Matrix3 rodrigues(const Vector3& axis_angle) {
  const double th = axis_angle.norm();
  if (th == 0.0) return Matrix3::Identity();
  const Vector3 k = axis_angle / th;
  Matrix3 kx;
  kx << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Matrix3::Identity() + std::sin(th) * kx + (1.0 - std::cos(th)) * kx * kx;
}

inline double angle_between(const Matrix3& a, const Matrix3& b) {
  // atan2 of the sine and cosine parts keeps full precision near zero.
  const Matrix3 r = a * b.transpose();
  const Vector3 s(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return std::atan2(0.5 * s.norm(), 0.5 * (r.trace() - 1.0));
}

}  // namespace cvtest
