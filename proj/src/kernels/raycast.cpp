#include <cmath>
#include <limits>

#include "cloudvision/kernels.hpp"

namespace cloudvision::kernels {

RectIntersector::RectIntersector(const Rect& r) : corner(r.corner) {
  normal = r.edge_u.cross(r.edge_v);
  const Vector3 vn = r.edge_v.cross(normal);
  const Vector3 nu = normal.cross(r.edge_u);
  dual_u = vn / r.edge_u.dot(vn);
  dual_v = nu / r.edge_v.dot(nu);
}

bool RectIntersector::intersect(const Ray& ray, double t_min, double& t, double& a, double& b) const {
  const double denom = normal.dot(ray.direction);
  if (std::abs(denom) < 1e-14) return false;
  const double tt = normal.dot(corner - ray.origin) / denom;
  if (!(tt > t_min)) return false;
  const Vector3 q = ray.origin + tt * ray.direction - corner;
  const double aa = q.dot(dual_u);
  if (aa < 0.0 || aa > 1.0) return false;
  const double bb = q.dot(dual_v);
  if (bb < 0.0 || bb > 1.0) return false;
  t = tt;
  a = aa;
  b = bb;
  return true;
}

std::vector<RectIntersector> make_intersectors(std::span<const Rect> rects) {
  std::vector<RectIntersector> out;
  out.reserve(rects.size());
  for (const auto& r : rects) out.emplace_back(r);
  return out;
}

namespace {

RayHit nearest_hit(std::span<const RectIntersector> rects, const Ray& ray) {
  RayHit best;
  best.t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rects.size(); ++i) {
    double t, a, b;
    if (rects[i].intersect(ray, kRayEpsilon, t, a, b) && t < best.t) {
      best.t = t;
      best.a = a;
      best.b = b;
      best.patch = static_cast<std::int32_t>(i);
    }
  }
  if (!best.hit()) best.t = 0.0;
  return best;
}

}  // namespace

void cast_rays(std::span<const RectIntersector> rects, std::span<const Ray> rays, std::span<RayHit> hits) {
  const auto n = static_cast<std::ptrdiff_t>(rays.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t i = 0; i < n; ++i) hits[i] = nearest_hit(rects, rays[i]);
}

namespace serial {

void cast_rays(std::span<const RectIntersector> rects, std::span<const Ray> rays, std::span<RayHit> hits) {
  for (std::size_t i = 0; i < rays.size(); ++i) hits[i] = nearest_hit(rects, rays[i]);
}

}  // namespace serial
}  // namespace cloudvision::kernels
