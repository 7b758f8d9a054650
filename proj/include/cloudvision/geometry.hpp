#pragma once

#include <filesystem>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace cloudvision {

using Vector2 = Eigen::Vector2d;
using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Matrix23 = Eigen::Matrix<double, 2, 3>;
using Matrix36 = Eigen::Matrix<double, 3, 6>;

/// Rigid transform stored as a unit quaternion plus translation.
///
/// Poses used for cameras are world-from-camera: `pose * p_cam` gives the
/// point in world coordinates and `translation` is the camera center.
struct Pose {
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
  Vector3 translation = Vector3::Zero();

  Pose() = default;
  Pose(const Eigen::Quaterniond& q, const Vector3& t);
  Pose(const Matrix3& r, const Vector3& t);

  static Pose identity() { return {}; }

  Pose inverse() const;
  Matrix3 rotation_matrix() const { return rotation.toRotationMatrix(); }

  /// Composition; the result's quaternion is renormalized.
  Pose operator*(const Pose& other) const;
  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }
};

/// Tangent-space increment, translation first.
struct Twist {
  Vector3 rho = Vector3::Zero();
  Vector3 phi = Vector3::Zero();

  Twist() = default;
  Twist(const Vector3& rho_, const Vector3& phi_) : rho(rho_), phi(phi_) {}
  explicit Twist(const Vector6& v) : rho(v.head<3>()), phi(v.tail<3>()) {}

  Vector6 vector() const {
    Vector6 v;
    v << rho, phi;
    return v;
  }
};

Matrix3 skew(const Vector3& v);
Matrix3 so3_exp(const Vector3& phi);
Vector3 so3_log(const Eigen::Quaterniond& q);
double rotation_angle(const Eigen::Quaterniond& q);

Pose se3_exp(const Twist& xi);
/// Throws Error(AngleNearPi) when the rotation angle is within 1e-6 of pi.
Twist se3_log(const Pose& pose);

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  bool valid() const { return fx > 0 && fy > 0 && width >= 1 && height >= 1; }
  /// Intrinsics of an image decimated by `divisor` with pixel (i, j) taken
  /// from pixel (divisor*i, divisor*j) of the original.
  CameraIntrinsics scaled(int divisor) const;
};

inline constexpr double kDefaultMinDepth = 0.05;

struct Projection {
  Vector2 uv = Vector2::Zero();
  Matrix23 jacobian = Matrix23::Zero();  // d(uv) / d(p_cam)
  bool valid = false;
};

Projection project(const CameraIntrinsics& k, const Vector3& p_cam,
                   double z_min = kDefaultMinDepth);

struct PoseError {
  double trans_m = 0.0;
  double rot_deg = 0.0;
};

PoseError pose_error(const Pose& estimate, const Pose& ground_truth);

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const CameraIntrinsics& k, const std::filesystem::path& path);

}  // namespace cloudvision
