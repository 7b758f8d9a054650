#include <algorithm>
#include <cmath>

#include "cloudvision/kernels.hpp"

namespace cloudvision::kernels {

double RobustLoss::cost(double e) const {
  if (kind == LossKind::Quadratic || e <= delta) return 0.5 * e * e;
  return delta * (e - 0.5 * delta);
}

double RobustLoss::weight(double e) const {
  if (kind == LossKind::Quadratic || e <= delta) return 1.0;
  return delta / e;
}

bool linearize_point(const Vector3& point_w, const FeatureVec& ref, const FeatureLevel& level,
                     const CameraIntrinsics& k_level, const Matrix3& r_cw, const Vector3& t_cw,
                     bool with_jacobian, PointLinearization& out) {
  const Vector3 p_c = r_cw * point_w + t_cw;
  const Projection proj = project(k_level, p_c);
  if (!proj.valid || !in_sampling_bounds(level, proj.uv)) return false;
  if (!with_jacobian) {
    const auto f = sample_value(level, proj.uv);
    if (!f) return false;
    out.residual = *f - ref;
    return true;
  }
  const auto s = sample(level, proj.uv);
  if (!s) return false;
  out.residual = s->f - ref;
  Matrix36 dp_dxi;
  dp_dxi.leftCols<3>() = -r_cw;
  dp_dxi.rightCols<3>() = r_cw * skew(point_w);
  out.jacobian = s->grad * (proj.jacobian * dp_dxi);
  return true;
}

namespace {

constexpr std::size_t kBlock = 256;

struct Frame {
  Matrix3 r_cw;
  Vector3 t_cw;
};

Frame make_frame(const Pose& world_from_camera) {
  const Pose cw = world_from_camera.inverse();
  return {cw.rotation_matrix(), cw.translation};
}

void accumulate_range(const LinearizeInput& in, const Frame& frame, std::size_t begin, std::size_t end,
                      NormalEquations& acc) {
  PointLinearization lin;
  for (std::size_t i = begin; i < end; ++i) {
    if (!linearize_point(in.points[i], in.refs[i], *in.level, in.k_level, frame.r_cw, frame.t_cw,
                         in.with_jacobian, lin)) {
      continue;
    }
    const double e = lin.residual.norm();
    acc.cost += in.loss.cost(e);
    ++acc.inliers;
    if (in.with_jacobian) {
      const double w = in.loss.weight(e);
      acc.hessian.noalias() += w * lin.jacobian.transpose() * lin.jacobian;
      acc.gradient.noalias() += w * lin.jacobian.transpose() * lin.residual;
    }
  }
}

void add(NormalEquations& into, const NormalEquations& part) {
  into.hessian += part.hessian;
  into.gradient += part.gradient;
  into.cost += part.cost;
  into.inliers += part.inliers;
}

}  // namespace

NormalEquations linearize(const LinearizeInput& in) {
  const Frame frame = make_frame(in.world_from_camera);
  const std::size_t n = in.points.size();
  const auto blocks = static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
  std::vector<NormalEquations> partial(static_cast<std::size_t>(blocks));
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < blocks; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    accumulate_range(in, frame, begin, std::min(n, begin + kBlock), partial[static_cast<std::size_t>(b)]);
  }
  NormalEquations total;
  for (const auto& p : partial) add(total, p);
  return total;
}

namespace serial {

NormalEquations linearize(const LinearizeInput& in) {
  const Frame frame = make_frame(in.world_from_camera);
  NormalEquations total;
  accumulate_range(in, frame, 0, in.points.size(), total);
  return total;
}

}  // namespace serial
}  // namespace cloudvision::kernels
