#include "cloudvision/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cloudvision/error.hpp"

namespace cloudvision::synth {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t hash3(std::uint64_t seed, std::int64_t a, std::int64_t b) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(a));
  return splitmix64(h ^ (static_cast<std::uint64_t>(b) * 0xD1B54A32D192ED03ull));
}

double unit(std::uint64_t h) { return static_cast<double>(h >> 11) * 0x1.0p-53; }

// Timestamps are kept on a microsecond grid so that they survive the
// six-decimal text formats unchanged.
double round_us(double t) { return std::round(t * 1e6) / 1e6; }

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// Lattice value noise in [-1, 1] with quintic interpolation.
double value_noise(std::uint64_t seed, double x, double y) {
  const double fx = std::floor(x), fy = std::floor(y);
  const auto ix = static_cast<std::int64_t>(fx), iy = static_cast<std::int64_t>(fy);
  const double tx = fade(x - fx), ty = fade(y - fy);
  auto v = [&](std::int64_t i, std::int64_t j) { return 2.0 * unit(hash3(seed, i, j)) - 1.0; };
  const double a = v(ix, iy) + tx * (v(ix + 1, iy) - v(ix, iy));
  const double b = v(ix, iy + 1) + tx * (v(ix + 1, iy + 1) - v(ix, iy + 1));
  return a + ty * (b - a);
}

Patch make_patch(const Vector3& corner, const Vector3& u, const Vector3& v, std::mt19937_64& rng) {
  return {{corner, u, v}, rng()};
}

void add_wall(std::vector<Patch>& out, const Eigen::Vector2d& p, const Eigen::Vector2d& q, double height,
              double panel_length, std::mt19937_64& rng) {
  const double len = (q - p).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / panel_length - 1e-9)));
  const Eigen::Vector2d step = (q - p) / n;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d c = p + i * step;
    out.push_back(make_patch({c.x(), c.y(), 0.0}, {step.x(), step.y(), 0.0}, {0.0, 0.0, height}, rng));
  }
}

void add_floor_ceiling(std::vector<Patch>& out, double x0, double y0, double x1, double y1, double height,
                       std::mt19937_64& rng) {
  out.push_back(make_patch({x0, y0, 0.0}, {x1 - x0, 0.0, 0.0}, {0.0, y1 - y0, 0.0}, rng));
  out.push_back(make_patch({x0, y0, height}, {x1 - x0, 0.0, 0.0}, {0.0, y1 - y0, 0.0}, rng));
}

// Floor and ceiling tiles over [-ox, ox] x [-oy, oy], skipping tiles that lie
// entirely inside the inner block [-ix, ix] x [-iy, iy].
void add_tiled_floor_ceiling(std::vector<Patch>& out, double ox, double oy, double ix, double iy, double height,
                             double tile, std::mt19937_64& rng) {
  const int nx = std::max(1, static_cast<int>(std::ceil(2.0 * ox / tile - 1e-9)));
  const int ny = std::max(1, static_cast<int>(std::ceil(2.0 * oy / tile - 1e-9)));
  const double sx = 2.0 * ox / nx, sy = 2.0 * oy / ny;
  for (double z : {0.0, height}) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const double x0 = -ox + i * sx, y0 = -oy + j * sy;
        if (x0 >= -ix && x0 + sx <= ix && y0 >= -iy && y0 + sy <= iy) continue;
        out.push_back(make_patch({x0, y0, z}, {sx, 0.0, 0.0}, {0.0, sy, 0.0}, rng));
      }
    }
  }
}

struct LoopLayout {
  double half_x;  // half extents of the centerline rectangle (vertex positions)
  double half_y;
};

LoopLayout loop_layout(const SceneSpec& spec) {
  const double straights = 0.5 * (spec.loop_length - 2.0 * kPi * spec.corner_radius);
  const double b = straights / (1.0 + spec.aspect);
  const double a = straights - b;
  return {0.5 * a + spec.corner_radius, 0.5 * b + spec.corner_radius};
}

// Box standing against a wall: front, two sides and top.
void add_box(std::vector<Patch>& out, const Eigen::Vector2d& wall_start, const Eigen::Vector2d& along,
             const Eigen::Vector2d& inward, double width, double depth, double height, std::mt19937_64& rng) {
  const Vector3 w0(wall_start.x(), wall_start.y(), 0.0);
  const Vector3 t(along.x() * width, along.y() * width, 0.0);
  const Vector3 d(inward.x() * depth, inward.y() * depth, 0.0);
  const Vector3 up(0.0, 0.0, height);
  out.push_back(make_patch(w0 + d, t, up, rng));
  out.push_back(make_patch(w0, d, up, rng));
  out.push_back(make_patch(w0 + t, d, up, rng));
  out.push_back(make_patch(w0 + up, t, d, rng));
}

void generate_loop(const SceneSpec& spec, std::mt19937_64& rng, std::vector<Patch>& out) {
  const LoopLayout lay = loop_layout(spec);
  const double hw = 0.5 * spec.corridor_width;
  const double ox = lay.half_x + hw, oy = lay.half_y + hw;
  const double ix = lay.half_x - hw, iy = lay.half_y - hw;
  add_tiled_floor_ceiling(out, ox, oy, ix, iy, spec.height, spec.panel_length, rng);
  const Eigen::Vector2d outer[4] = {{-ox, -oy}, {ox, -oy}, {ox, oy}, {-ox, oy}};
  const Eigen::Vector2d inner[4] = {{-ix, -iy}, {ix, -iy}, {ix, iy}, {-ix, iy}};
  for (int i = 0; i < 4; ++i) add_wall(out, outer[i], outer[(i + 1) % 4], spec.height, spec.panel_length, rng);
  for (int i = 0; i < 4; ++i) add_wall(out, inner[i], inner[(i + 1) % 4], spec.height, spec.panel_length, rng);

  // Clutter along the straight parts of the walls.
  const FilletPath path = loop_centerline(spec, 0.0);
  const int boxes = static_cast<int>(std::lround(spec.clutter_density * path.length()));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<std::pair<double, int>> placed;  // (arc, side)
  for (int tries = 0; static_cast<int>(placed.size()) < boxes && tries < 50 * (boxes + 1); ++tries) {
    const double s = u01(rng) * path.length();
    const int side = u01(rng) < 0.5 ? 1 : -1;  // +1: outer (right of travel), -1: inner
    const double width = 0.6 + 0.6 * u01(rng);
    const double depth = 0.25 + 0.25 * u01(rng);
    const double height = 0.5 + 1.1 * u01(rng);
    const PathSample a = path.at(s);
    const PathSample b = path.at(std::fmod(s + width, path.length()));
    if (std::abs(a.yaw - b.yaw) > 1e-9) continue;  // not entirely on a straight
    const bool clash = std::any_of(placed.begin(), placed.end(), [&](const auto& p) {
      const double gap = std::abs(p.first - s);
      return p.second == side && std::min(gap, path.length() - gap) < 2.0;
    });
    if (clash) continue;
    const Eigen::Vector2d along(std::cos(a.yaw), std::sin(a.yaw));
    const Eigen::Vector2d right(along.y(), -along.x());
    const Eigen::Vector2d normal_out = side > 0 ? right : Eigen::Vector2d(-right);
    const Eigen::Vector2d wall_start = a.position.head<2>() + hw * normal_out;
    add_box(out, wall_start, along, -normal_out, width, depth, height, rng);
    placed.emplace_back(s, side);
  }
}

void generate_room(const SceneSpec& spec, std::mt19937_64& rng, std::vector<Patch>& out) {
  const Vector3& d = spec.room_dims;
  add_floor_ceiling(out, 0.0, 0.0, d.x(), d.y(), d.z(), rng);
  const Eigen::Vector2d c[4] = {{0, 0}, {d.x(), 0}, {d.x(), d.y()}, {0, d.y()}};
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d e = c[(i + 1) % 4] - c[i];
    out.push_back(make_patch({c[i].x(), c[i].y(), 0.0}, {e.x(), e.y(), 0.0}, {0.0, 0.0, d.z()}, rng));
  }
}

void generate_two_rooms(const SceneSpec& spec, std::mt19937_64& rng, std::vector<Patch>& out) {
  const double x = spec.room_dims.x(), y = spec.room_dims.y(), z = spec.room_dims.z();
  add_floor_ceiling(out, 0.0, 0.0, 2.0 * x, y, z, rng);
  out.push_back(make_patch({0, 0, 0}, {2 * x, 0, 0}, {0, 0, z}, rng));
  out.push_back(make_patch({0, y, 0}, {2 * x, 0, 0}, {0, 0, z}, rng));
  out.push_back(make_patch({0, 0, 0}, {0, y, 0}, {0, 0, z}, rng));
  out.push_back(make_patch({2 * x, 0, 0}, {0, y, 0}, {0, 0, z}, rng));
  // Shared wall with a doorway centered in y.
  const double side = 0.5 * (y - spec.doorway_width);
  out.push_back(make_patch({x, 0, 0}, {0, side, 0}, {0, 0, z}, rng));
  out.push_back(make_patch({x, y - side, 0}, {0, side, 0}, {0, 0, z}, rng));
  out.push_back(make_patch({x, side, spec.doorway_height}, {0, spec.doorway_width, 0},
                           {0, 0, z - spec.doorway_height}, rng));
}

}  // namespace

void SceneSpec::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::InvalidSpec, what); };
  switch (kind) {
    case SceneKind::Room:
    case SceneKind::TwoRooms:
      if (!(room_dims.minCoeff() > 0.0)) fail("room dimensions must be positive");
      if (kind == SceneKind::TwoRooms &&
          !(doorway_width > 0 && doorway_width < room_dims.y() && doorway_height > 0 && doorway_height < room_dims.z())) {
        fail("doorway must fit inside the shared wall");
      }
      break;
    case SceneKind::LoopCorridor: {
      if (!(loop_length > 0 && aspect >= 1.0 && corner_radius > 0 && corridor_width > 0 && height > 0 &&
            panel_length > 0 && clutter_density >= 0)) {
        fail("corridor dimensions must be positive");
      }
      if (!(loop_length > 2.0 * std::numbers::pi * corner_radius)) fail("loop too short for its corner radius");
      const LoopLayout lay = loop_layout(*this);
      if (!(std::min(lay.half_x, lay.half_y) > 0.5 * corridor_width)) fail("corridor too wide for the loop");
      break;
    }
  }
}

std::vector<kernels::Rect> Scene::rects() const {
  std::vector<kernels::Rect> r;
  r.reserve(patches.size());
  for (const auto& p : patches) r.push_back(p.rect);
  return r;
}

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  Scene scene;
  scene.spec = spec;
  scene.seed = seed;
  std::mt19937_64 rng(splitmix64(seed));
  switch (spec.kind) {
    case SceneKind::Room: generate_room(spec, rng, scene.patches); break;
    case SceneKind::TwoRooms: generate_two_rooms(spec, rng, scene.patches); break;
    case SceneKind::LoopCorridor: generate_loop(spec, rng, scene.patches); break;
  }
  return scene;
}

double texture_value(std::uint64_t seed, double s, double t) {
  const double base = 45.0 + 165.0 * unit(hash3(seed, 1, 0));
  const double cell = 0.35 + 0.3 * unit(hash3(seed, 2, 0));
  const double phase_s = 10.0 * unit(hash3(seed, 3, 0));
  const double phase_t = 10.0 * unit(hash3(seed, 4, 0));
  const double x = s + phase_s, y = t + phase_t;
  double v = base;
  v += 25.0 * value_noise(seed ^ 0x11, x / 0.9, y / 0.9);
  v += 18.0 * value_noise(seed ^ 0x22, x / 0.35, y / 0.35);
  v += 10.0 * value_noise(seed ^ 0x33, x / 0.14, y / 0.14);
  v += 14.0 * std::tanh(2.5 * std::sin(kPi * x / cell) * std::sin(kPi * y / cell));
  // One to three flat rectangular decals (doors, posters, rugs).
  const int decals = 1 + static_cast<int>(hash3(seed, 5, 0) % 3);
  for (int i = 0; i < decals; ++i) {
    const double s0 = 2.6 * unit(hash3(seed, 6, i)), t0 = 2.6 * unit(hash3(seed, 7, i));
    const double ws = 0.3 + 0.9 * unit(hash3(seed, 8, i)), wt = 0.3 + 0.9 * unit(hash3(seed, 9, i));
    if (s >= s0 && s <= s0 + ws && t >= t0 && t <= t0 + wt) {
      const double delta = 50.0 + 60.0 * unit(hash3(seed, 10, i));
      v += (hash3(seed, 11, i) & 1) ? delta : -delta;
    }
  }
  return std::clamp(v, 1.0, 255.0);
}

std::optional<double> shade(const Scene& scene, const kernels::RayHit& hit) {
  if (!hit.hit()) return std::nullopt;
  const Patch& p = scene.patches[static_cast<std::size_t>(hit.patch)];
  return texture_value(p.texture_seed, hit.a * p.rect.edge_u.norm(), hit.b * p.rect.edge_v.norm());
}

RayCaster::RayCaster(const Scene& scene) : rects_(kernels::make_intersectors(scene.rects())) {}

void RayCaster::cast(std::span<const kernels::Ray> rays, std::span<kernels::RayHit> hits) const {
  kernels::cast_rays(rects_, rays, hits);
}

kernels::RayHit RayCaster::cast(const kernels::Ray& ray) const {
  kernels::RayHit hit;
  kernels::serial::cast_rays(rects_, std::span(&ray, 1), std::span(&hit, 1));
  return hit;
}

Render render(const Scene& scene, const Pose& pose, const CameraIntrinsics& k) {
  if (!k.valid()) throw Error(ErrorCode::InvalidSpec, "invalid intrinsics");
  const Matrix3 r = pose.rotation_matrix();
  std::vector<kernels::Ray> rays(static_cast<std::size_t>(k.width) * k.height);
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vector3 d((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      rays[static_cast<std::size_t>(v) * k.width + u] = {pose.translation, (r * d).normalized()};
    }
  }
  std::vector<kernels::RayHit> hits(rays.size());
  RayCaster(scene).cast(rays, hits);

  Render out{Image8(k.width, k.height, 0), Image<double>(k.width, k.height, 0.0)};
  const auto n = static_cast<std::ptrdiff_t>(hits.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto value = shade(scene, hits[i]);
    if (!value) continue;
    out.image.data[i] = static_cast<std::uint8_t>(std::lround(*value));
    out.depth.data[i] = hits[i].t;
  }
  return out;
}

Image8 render_image(const Scene& scene, const Pose& pose, const CameraIntrinsics& k) {
  return render(scene, pose, k).image;
}

LidarPattern::LidarPattern() {
  for (int i = 0; i < 16; ++i) ring_elevations_deg[i] = -15.0 + 2.0 * i;
}

LidarScan simulate_scan(const Scene& scene, const Pose& pose, const LidarPattern& pattern, double timestamp,
                        const ScanNoise& noise) {
  if (!(pattern.azimuth_step_deg > 0.0) || !(pattern.max_range > 0.0)) {
    throw Error(ErrorCode::InvalidSpec, "invalid LiDAR pattern");
  }
  const int steps = static_cast<int>(std::lround(360.0 / pattern.azimuth_step_deg));
  std::vector<Vector3> dirs;
  dirs.reserve(static_cast<std::size_t>(steps) * 16);
  for (int a = 0; a < steps; ++a) {
    const double az = a * pattern.azimuth_step_deg * kPi / 180.0;
    for (double el_deg : pattern.ring_elevations_deg) {
      const double el = el_deg * kPi / 180.0;
      dirs.emplace_back(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
    }
  }
  const Matrix3 r = pose.rotation_matrix();
  std::vector<kernels::Ray> rays(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) rays[i] = {pose.translation, r * dirs[i]};
  std::vector<kernels::RayHit> hits(rays.size());
  RayCaster(scene).cast(rays, hits);

  LidarScan scan;
  scan.timestamp = timestamp;
  std::mt19937_64 rng(splitmix64(noise.seed));
  std::normal_distribution<double> gauss(0.0, noise.range_sigma > 0.0 ? noise.range_sigma : 1.0);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (!hits[i].hit() || hits[i].t > pattern.max_range) continue;
    double range = hits[i].t;
    if (noise.range_sigma > 0.0) range += gauss(rng);
    scan.points.push_back(range * dirs[i]);
  }
  return scan;
}

Pose default_extrinsic(double height) {
  Matrix3 r_cl;
  r_cl << 0, -1, 0,
          0, 0, -1,
          1, 0, 0;
  return Pose(r_cl, Vector3(0.0, -height, 0.0));
}

Eigen::Quaterniond camera_orientation(double yaw, double pitch, double roll) {
  Matrix3 base;
  base.col(0) = Vector3(std::sin(yaw), -std::cos(yaw), 0.0);
  base.col(1) = Vector3(0.0, 0.0, -1.0);
  base.col(2) = Vector3(std::cos(yaw), std::sin(yaw), 0.0);
  const Matrix3 r = base * Eigen::AngleAxisd(pitch, Vector3::UnitX()).toRotationMatrix() *
                    Eigen::AngleAxisd(roll, Vector3::UnitZ()).toRotationMatrix();
  return Eigen::Quaterniond(r).normalized();
}

FilletPath::FilletPath(std::vector<Eigen::Vector2d> vertices, bool closed, double corner_radius, double z)
    : z_(z), closed_(closed) {
  const std::size_t n = vertices.size();
  if (n < 2 || (closed && n < 3)) throw Error(ErrorCode::InvalidSpec, "path needs more vertices");
  // Fillet endpoints at each vertex (none at the ends of an open path).
  std::vector<Eigen::Vector2d> fillet_in(n), fillet_out(n);
  std::vector<Segment> arcs(n);
  std::vector<bool> has_arc(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    fillet_in[i] = fillet_out[i] = vertices[i];
    if (!closed && (i == 0 || i + 1 == n)) continue;
    const Eigen::Vector2d prev = vertices[(i + n - 1) % n], next = vertices[(i + 1) % n];
    const Eigen::Vector2d d_in = (vertices[i] - prev).normalized();
    const Eigen::Vector2d d_out = (next - vertices[i]).normalized();
    const double turn = std::atan2(d_in.x() * d_out.y() - d_in.y() * d_out.x(), d_in.dot(d_out));
    if (std::abs(turn) < 1e-12) continue;
    const double tangent = corner_radius * std::tan(0.5 * std::abs(turn));
    fillet_in[i] = vertices[i] - tangent * d_in;
    fillet_out[i] = vertices[i] + tangent * d_out;
    const Eigen::Vector2d left(-d_in.y(), d_in.x());
    Segment arc;
    arc.arc = true;
    arc.radius = corner_radius;
    arc.center = fillet_in[i] + (turn > 0 ? 1.0 : -1.0) * corner_radius * left;
    const Eigen::Vector2d rel = fillet_in[i] - arc.center;
    arc.angle0 = std::atan2(rel.y(), rel.x());
    arc.turn = turn;
    arc.length = corner_radius * std::abs(turn);
    arc.dir = d_in;
    arcs[i] = arc;
    has_arc[i] = true;
  }
  auto add_line = [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    Segment line;
    line.start = a;
    line.length = (b - a).norm();
    line.dir = (b - a) / line.length;
    if (line.length > 1e-12) segments_.push_back(line);
  };
  const std::size_t edges = closed ? n : n - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    const std::size_t j = (i + 1) % n;
    add_line(fillet_out[i], fillet_in[j]);
    if (has_arc[j]) segments_.push_back(arcs[j]);
  }
  for (const auto& s : segments_) length_ += s.length;
}

PathSample FilletPath::at(double s) const {
  if (closed_) {
    s = std::fmod(s, length_);
    if (s < 0) s += length_;
  } else {
    s = std::clamp(s, 0.0, length_);
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& seg = segments_[i];
    if (s > seg.length && i + 1 < segments_.size()) {
      s -= seg.length;
      continue;
    }
    s = std::min(s, seg.length);
    PathSample out;
    if (!seg.arc) {
      const Eigen::Vector2d p = seg.start + s * seg.dir;
      out.position = Vector3(p.x(), p.y(), z_);
      out.yaw = std::atan2(seg.dir.y(), seg.dir.x());
    } else {
      const double frac = s / seg.length;
      const double angle = seg.angle0 + frac * seg.turn;
      out.position = Vector3(seg.center.x() + seg.radius * std::cos(angle),
                             seg.center.y() + seg.radius * std::sin(angle), z_);
      out.yaw = std::atan2(seg.dir.y(), seg.dir.x()) + frac * seg.turn;
    }
    return out;
  }
  return {Vector3(0, 0, z_), 0.0};
}

FilletPath loop_centerline(const SceneSpec& spec, double z) {
  const LoopLayout lay = loop_layout(spec);
  return FilletPath({{-lay.half_x, -lay.half_y}, {lay.half_x, -lay.half_y}, {lay.half_x, lay.half_y},
                     {-lay.half_x, lay.half_y}},
                    true, spec.corner_radius, z);
}

void TrajectorySpec::validate() const {
  if (!(scan_spacing > 0 && db_images > 0 && queries >= 0 && speed > 0 && camera_height > 0 &&
        query_lateral_max >= 0 && query_vertical_max >= 0 && query_yaw_max_deg >= 0 && query_tilt_max_deg >= 0)) {
    throw Error(ErrorCode::InvalidSpec, "trajectory parameters must be positive");
  }
}

TrajectorySet generate_trajectory(const FilletPath& path, const TrajectorySpec& spec, const Pose& extrinsic,
                                  std::uint64_t seed) {
  spec.validate();
  const double len = path.length();
  auto camera_pose = [&](double s) {
    const PathSample p = path.at(s);
    return Pose(camera_orientation(p.yaw), p.position);
  };
  const bool closed = (path.at(0.0).position - path.at(len).position).norm() < 1e-9;

  TrajectorySet out;
  const int scans = std::max(1, static_cast<int>(std::lround(len / spec.scan_spacing)));
  for (int i = 0; i <= scans; ++i) {
    const double s = len * i / scans;
    Pose cam = camera_pose(s);
    if (closed && i == scans) cam = camera_pose(0.0);
    out.lidar_traj.push_back({round_us(s / spec.speed), cam * extrinsic});
  }
  for (int m = 0; m < spec.db_images; ++m) {
    const double s = closed ? len * m / spec.db_images : len * (m + 0.5) / spec.db_images;
    out.db_poses.push_back({round_us(s / spec.speed), camera_pose(s)});
  }

  std::mt19937_64 rng(splitmix64(seed ^ 0x5157A11CEull));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<double> arcs(static_cast<std::size_t>(spec.queries));
  for (double& s : arcs) s = u01(rng) * len;
  std::sort(arcs.begin(), arcs.end());
  const double deg = kPi / 180.0;
  double last_t = -1e300;
  for (double s : arcs) {
    const PathSample p = path.at(s);
    const double lateral = spec.query_lateral_max * (2.0 * u01(rng) - 1.0);
    const double vertical = spec.query_vertical_max * (2.0 * u01(rng) - 1.0);
    const double dyaw = spec.query_yaw_max_deg * deg * (2.0 * u01(rng) - 1.0);
    const double pitch = spec.query_tilt_max_deg * deg * (2.0 * u01(rng) - 1.0);
    const double roll = spec.query_tilt_max_deg * deg * (2.0 * u01(rng) - 1.0);
    const Vector3 left(-std::sin(p.yaw), std::cos(p.yaw), 0.0);
    const Vector3 pos = p.position + lateral * left + Vector3(0, 0, vertical);
    double t = round_us(spec.query_time_offset + s / spec.speed);
    if (t <= last_t) t = round_us(last_t + 1e-6);
    last_t = t;
    out.query_poses.push_back({t, Pose(camera_orientation(p.yaw + dyaw, pitch, roll), pos)});
    out.query_arc.push_back(s);
  }
  return out;
}

TrajectorySet generate_trajectory(const SceneSpec& scene, const TrajectorySpec& spec, const Pose& extrinsic,
                                  std::uint64_t seed) {
  scene.validate();
  const double z = spec.camera_height;
  switch (scene.kind) {
    case SceneKind::LoopCorridor:
      return generate_trajectory(loop_centerline(scene, z), spec, extrinsic, seed);
    case SceneKind::Room: {
      const Vector3& d = scene.room_dims;
      const double m = 0.3 * std::min(d.x(), d.y());
      return generate_trajectory(
          FilletPath({{m, m}, {d.x() - m, m}, {d.x() - m, d.y() - m}, {m, d.y() - m}}, true, 0.5 * m, z), spec,
          extrinsic, seed);
    }
    case SceneKind::TwoRooms: {
      const Vector3& d = scene.room_dims;
      return generate_trajectory(FilletPath({{0.3 * d.x(), 0.25 * d.y()},
                                             {0.5 * d.x(), 0.5 * d.y()},
                                             {1.5 * d.x(), 0.5 * d.y()},
                                             {1.7 * d.x(), 0.75 * d.y()}},
                                            false, 0.5, z),
                                 spec, extrinsic, seed);
    }
  }
  throw Error(ErrorCode::InvalidSpec, "unknown scene kind");
}

DatasetSpec DatasetSpec::full_scale() {
  DatasetSpec spec;
  spec.scene.loop_length = 380.0;
  spec.trajectory.db_images = 300;
  spec.trajectory.queries = 300;
  return spec;
}

Dataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  const Scene scene = generate_scene(spec.scene, seed);
  Dataset ds;
  ds.camera = spec.camera;
  ds.extrinsic = default_extrinsic(spec.lidar_mount_height);
  TrajectorySet traj = generate_trajectory(spec.scene, spec.trajectory, ds.extrinsic, seed);
  ds.lidar_traj = std::move(traj.lidar_traj);
  ds.db_poses = std::move(traj.db_poses);
  ds.query_gt = std::move(traj.query_poses);
  ds.scans.reserve(ds.lidar_traj.size());
  for (std::size_t i = 0; i < ds.lidar_traj.size(); ++i) {
    ScanNoise noise = spec.scan_noise;
    noise.seed = splitmix64(spec.scan_noise.seed ^ (seed + i));
    ds.scans.push_back(simulate_scan(scene, ds.lidar_traj[i].pose, spec.lidar, ds.lidar_traj[i].timestamp, noise));
    // Kept at the precision of the scan file format, so a dataset and its
    // written copy build the same map.
    for (auto& p : ds.scans.back().points) p = p.cast<float>().cast<double>();
  }
  for (const auto& p : ds.db_poses) ds.db_images.push_back(render_image(scene, p.pose, spec.camera));
  for (const auto& p : ds.query_gt) ds.query_images.push_back(render_image(scene, p.pose, spec.camera));
  return ds;
}

}  // namespace cloudvision::synth
