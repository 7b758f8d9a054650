#include "cloudvision/kernels.hpp"

namespace cloudvision::kernels {

namespace {

struct CovisTest {
  Matrix3 r_cw;
  Vector3 t_cw;
  const CameraIntrinsics* k;
  double z_min;
  double max_range_sq;

  std::uint8_t operator()(const Vector3& p_w) const {
    const Vector3 p_c = r_cw * p_w + t_cw;
    if (p_c.squaredNorm() > max_range_sq) return 0;
    return project(*k, p_c, z_min).valid ? 1 : 0;
  }
};

CovisTest make_test(const Pose& world_from_camera, const CameraIntrinsics& k, double z_min, double max_range) {
  const Pose cw = world_from_camera.inverse();
  return {cw.rotation_matrix(), cw.translation, &k, z_min, max_range * max_range};
}

}  // namespace

void covisibility_flags(std::span<const Vector3> points, const Pose& world_from_camera,
                        const CameraIntrinsics& k, double z_min, double max_range,
                        std::span<std::uint8_t> flags) {
  const CovisTest test = make_test(world_from_camera, k, z_min, max_range);
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) flags[i] = test(points[i]);
}

namespace serial {

void covisibility_flags(std::span<const Vector3> points, const Pose& world_from_camera,
                        const CameraIntrinsics& k, double z_min, double max_range,
                        std::span<std::uint8_t> flags) {
  const CovisTest test = make_test(world_from_camera, k, z_min, max_range);
  for (std::size_t i = 0; i < points.size(); ++i) flags[i] = test(points[i]);
}

}  // namespace serial
}  // namespace cloudvision::kernels
