#pragma once

// Data-parallel inner loops. Every kernel has an OpenMP implementation in
// `cloudvision::kernels` and a plain sequential reference in
// `cloudvision::kernels::serial`; tests check that the two agree and the
// benchmark target compares their throughput.
//
// The OpenMP variants are deterministic: element-wise kernels write disjoint
// outputs, and reductions sum fixed-size blocks in block order, so results do
// not depend on the thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "cloudvision/features.hpp"
#include "cloudvision/geometry.hpp"
#include "cloudvision/image.hpp"

namespace cloudvision::kernels {

// ---------------------------------------------------------------- blur

/// Separable Gaussian, truncated at ceil(3 sigma), reflected borders.
ImageF gaussian_blur(const ImageF& in, double sigma);
std::vector<double> gaussian_taps(double sigma);

// ---------------------------------------------------------------- ray casting

struct Rect {
  Vector3 corner = Vector3::Zero();
  Vector3 edge_u = Vector3::UnitX();
  Vector3 edge_v = Vector3::UnitY();
};

struct Ray {
  Vector3 origin = Vector3::Zero();
  Vector3 direction = Vector3::UnitZ();  // need not be unit length
};

struct RayHit {
  double t = 0.0;      // ray parameter; distance when direction is unit
  std::int32_t patch = -1;  // -1: miss
  double a = 0.0;      // coordinates along edge_u / edge_v, in [0, 1]
  double b = 0.0;

  bool hit() const { return patch >= 0; }
};

/// Precomputed intersection data for one rectangle.
struct RectIntersector {
  Vector3 corner;
  Vector3 normal;
  Vector3 dual_u;  // a = (q - corner) . dual_u
  Vector3 dual_v;

  explicit RectIntersector(const Rect& r);
  /// Intersection with t > t_min, or nullopt-like miss (patch stays -1).
  bool intersect(const Ray& ray, double t_min, double& t, double& a, double& b) const;
};

std::vector<RectIntersector> make_intersectors(std::span<const Rect> rects);

inline constexpr double kRayEpsilon = 1e-9;

/// Nearest hit of each ray against all rectangles.
void cast_rays(std::span<const RectIntersector> rects, std::span<const Ray> rays, std::span<RayHit> hits);

// ---------------------------------------------------------------- co-visibility

/// flags[i] = 1 iff points[i] (world) projects into the camera at
/// `world_from_camera` with z > z_min, inside the image, and lies within
/// max_range of the camera center.
void covisibility_flags(std::span<const Vector3> points, const Pose& world_from_camera,
                        const CameraIntrinsics& k, double z_min, double max_range,
                        std::span<std::uint8_t> flags);

// ---------------------------------------------------------------- similarity

/// sims[m] = dot(db[m*dim .. (m+1)*dim), query), accumulated in double.
void dot_products(std::span<const float> db, std::span<const float> query, std::size_t dim,
                  std::span<double> sims);

// ---------------------------------------------------------------- linearization

enum class LossKind { Huber, Quadratic };

struct RobustLoss {
  LossKind kind = LossKind::Huber;
  double delta = 0.5;

  double cost(double e) const;
  double weight(double e) const;
};

using Matrix36F = Eigen::Matrix<double, kFeatureChannels, 6>;

struct PointLinearization {
  FeatureVec residual;
  Matrix36F jacobian;  // d residual / d twist (left perturbation of world_from_camera)
};

/// Residual F(pi(W^-1 p)) - ref at one level, and optionally its Jacobian.
/// Returns false when the projection is invalid or outside sampling bounds.
bool linearize_point(const Vector3& point_w, const FeatureVec& ref, const FeatureLevel& level,
                     const CameraIntrinsics& k_level, const Matrix3& r_cw, const Vector3& t_cw,
                     bool with_jacobian, PointLinearization& out);

struct NormalEquations {
  Matrix6 hessian = Matrix6::Zero();  // J^T W J
  Vector6 gradient = Vector6::Zero();  // J^T W r
  double cost = 0.0;
  std::size_t inliers = 0;
};

struct LinearizeInput {
  std::span<const Vector3> points;
  std::span<const FeatureVec> refs;
  const FeatureLevel* level = nullptr;
  CameraIntrinsics k_level;
  Pose world_from_camera;
  RobustLoss loss;
  bool with_jacobian = true;
};

NormalEquations linearize(const LinearizeInput& in);

namespace serial {
ImageF gaussian_blur(const ImageF& in, double sigma);
void cast_rays(std::span<const RectIntersector> rects, std::span<const Ray> rays, std::span<RayHit> hits);
void covisibility_flags(std::span<const Vector3> points, const Pose& world_from_camera,
                        const CameraIntrinsics& k, double z_min, double max_range,
                        std::span<std::uint8_t> flags);
void dot_products(std::span<const float> db, std::span<const float> query, std::size_t dim,
                  std::span<double> sims);
NormalEquations linearize(const LinearizeInput& in);
}  // namespace serial

}  // namespace cloudvision::kernels
