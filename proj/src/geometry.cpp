#include "cloudvision/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>

#include "cloudvision/error.hpp"

namespace cloudvision {

namespace {
constexpr double kSmallAngle = 1e-8;
constexpr double kNearPiMargin = 1e-6;
}  // namespace

Pose::Pose(const Eigen::Quaterniond& q, const Vector3& t) : rotation(q.normalized()), translation(t) {}

Pose::Pose(const Matrix3& r, const Vector3& t) : rotation(Eigen::Quaterniond(r).normalized()), translation(t) {}

Pose Pose::inverse() const {
  const Eigen::Quaterniond inv = rotation.conjugate();
  return Pose(inv, -(inv * translation));
}

Pose Pose::operator*(const Pose& other) const {
  return Pose((rotation * other.rotation).normalized(), rotation * other.translation + translation);
}

Matrix3 skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Matrix3 so3_exp(const Vector3& phi) {
  const double theta = phi.norm();
  const Matrix3 k = skew(phi);
  if (theta < kSmallAngle) {
    return Matrix3::Identity() + k + 0.5 * k * k;
  }
  return Matrix3::Identity() + (std::sin(theta) / theta) * k +
         ((1.0 - std::cos(theta)) / (theta * theta)) * k * k;
}

double rotation_angle(const Eigen::Quaterniond& q) {
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

Vector3 so3_log(const Eigen::Quaterniond& q_in) {
  Eigen::Quaterniond q = q_in.normalized();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const double s = q.vec().norm();
  if (s < kSmallAngle) {
    // atan2(s, w) / s -> 1 / w as s -> 0.
    return (2.0 / q.w()) * q.vec();
  }
  const double theta = 2.0 * std::atan2(s, q.w());
  return (theta / s) * q.vec();
}

Pose se3_exp(const Twist& xi) {
  const double theta = xi.phi.norm();
  const Matrix3 k = skew(xi.phi);
  Eigen::Quaterniond q;
  Matrix3 v;
  if (theta < kSmallAngle) {
    q = Eigen::Quaterniond(1.0, 0.5 * xi.phi.x(), 0.5 * xi.phi.y(), 0.5 * xi.phi.z());
    v = Matrix3::Identity() + 0.5 * k + (1.0 / 6.0) * k * k;
  } else {
    const double half = 0.5 * theta;
    const Vector3 axis = xi.phi / theta;
    q = Eigen::Quaterniond(std::cos(half), std::sin(half) * axis.x(), std::sin(half) * axis.y(),
                           std::sin(half) * axis.z());
    const double t2 = theta * theta;
    // 1 - cos written with the half-angle sine; theta - sin by its series
    // for small angles, where the difference cancels.
    const double sh = std::sin(half);
    const double b = 2.0 * sh * sh / t2;
    const double c = theta < 1e-3 ? 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 : (theta - std::sin(theta)) / (t2 * theta);
    v = Matrix3::Identity() + b * k + c * k * k;
  }
  return Pose(q, v * xi.rho);
}

Twist se3_log(const Pose& pose) {
  const double angle = rotation_angle(pose.rotation);
  if (angle >= std::numbers::pi - kNearPiMargin) {
    throw Error(ErrorCode::AngleNearPi, "rotation angle " + std::to_string(angle));
  }
  const Vector3 phi = so3_log(pose.rotation);
  const double theta = phi.norm();
  const Matrix3 k = skew(phi);
  double c;
  if (theta < kSmallAngle) {
    c = 1.0 / 12.0;
  } else {
    const double t2 = theta * theta;
    const double half = 0.5 * theta;
    c = theta < 1e-3 ? 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
                     : (1.0 - half * std::cos(half) / std::sin(half)) / t2;
  }
  const Matrix3 v_inv = Matrix3::Identity() - 0.5 * k + c * k * k;
  return Twist(v_inv * pose.translation, phi);
}

CameraIntrinsics CameraIntrinsics::scaled(int divisor) const {
  const double s = 1.0 / divisor;
  CameraIntrinsics k = *this;
  k.fx = fx * s;
  k.fy = fy * s;
  k.cx = cx * s;
  k.cy = cy * s;
  k.width = (width + divisor - 1) / divisor;
  k.height = (height + divisor - 1) / divisor;
  return k;
}

Projection project(const CameraIntrinsics& k, const Vector3& p, double z_min) {
  Projection out;
  const double z = p.z();
  if (!(z > z_min)) return out;
  const double inv_z = 1.0 / z;
  const double x = p.x() * inv_z;
  const double y = p.y() * inv_z;
  out.uv = Vector2(k.fx * x + k.cx, k.fy * y + k.cy);
  out.jacobian << k.fx * inv_z, 0.0, -k.fx * x * inv_z,
                  0.0, k.fy * inv_z, -k.fy * y * inv_z;
  out.valid = out.uv.x() >= 0.0 && out.uv.x() <= k.width - 1 && out.uv.y() >= 0.0 &&
              out.uv.y() <= k.height - 1;
  return out;
}

PoseError pose_error(const Pose& estimate, const Pose& ground_truth) {
  PoseError e;
  e.trans_m = (estimate.translation - ground_truth.translation).norm();
  const Eigen::Quaterniond delta = estimate.rotation * ground_truth.rotation.conjugate();
  e.rot_deg = rotation_angle(delta) * 180.0 / std::numbers::pi;
  return e;
}

CameraIntrinsics load_intrinsics(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open intrinsics file " + path.string());
  CameraIntrinsics k;
  bool seen[6] = {false, false, false, false, false, false};
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    double value = 0.0;
    if (!(ls >> key) || key.starts_with('#')) continue;
    static constexpr std::string_view kKeys[] = {"fx", "fy", "cx", "cy", "width", "height"};
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) continue;  // unknown keys are ignored
    if (!(ls >> value)) throw Error(ErrorCode::Parse, "intrinsics line without value: " + line);
    if (key == "fx") { k.fx = value; seen[0] = true; }
    else if (key == "fy") { k.fy = value; seen[1] = true; }
    else if (key == "cx") { k.cx = value; seen[2] = true; }
    else if (key == "cy") { k.cy = value; seen[3] = true; }
    else if (key == "width") { k.width = static_cast<int>(value); seen[4] = true; }
    else if (key == "height") { k.height = static_cast<int>(value); seen[5] = true; }
  }
  for (bool s : seen) {
    if (!s) throw Error(ErrorCode::Parse, "intrinsics file missing a key: " + path.string());
  }
  if (!k.valid()) throw Error(ErrorCode::Parse, "invalid intrinsics in " + path.string());
  return k;
}

void save_intrinsics(const CameraIntrinsics& k, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << std::setprecision(17);
  out << "fx " << k.fx << "\nfy " << k.fy << "\ncx " << k.cx << "\ncy " << k.cy << "\nwidth "
      << k.width << "\nheight " << k.height << "\n";
}

}  // namespace cloudvision
