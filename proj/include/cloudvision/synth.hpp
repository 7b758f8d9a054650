#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cloudvision/geometry.hpp"
#include "cloudvision/image.hpp"
#include "cloudvision/kernels.hpp"
#include "cloudvision/mapcloud.hpp"
#include "cloudvision/trajectory.hpp"

namespace cloudvision::synth {

enum class SceneKind { Room, TwoRooms, LoopCorridor };

struct SceneSpec {
  SceneKind kind = SceneKind::LoopCorridor;

  // Room / TwoRooms: extents of one room (x, y, z); rooms are joined along +x.
  Vector3 room_dims{4.0, 4.0, 3.0};
  double doorway_width = 1.0;
  double doorway_height = 2.1;

  // LoopCorridor: closed corridor whose centerline is a rounded rectangle.
  double loop_length = 38.0;
  double aspect = 1.6;          // ratio of the long to the short straight
  double corner_radius = 4.0;
  double corridor_width = 4.5;
  double height = 3.0;
  double panel_length = 3.0;    // walls are split into independently textured panels
  double clutter_density = 0.12;  // boxes per meter of corridor

  void validate() const;  // throws InvalidSpec
};

struct Patch {
  kernels::Rect rect;
  std::uint64_t texture_seed = 0;
};

struct Scene {
  SceneSpec spec;
  std::uint64_t seed = 0;
  std::vector<Patch> patches;

  std::vector<kernels::Rect> rects() const;
};

Scene generate_scene(const SceneSpec& spec, std::uint64_t seed);

/// Procedural intensity (0..255 before quantization) at patch-local
/// coordinates (s, t) in meters.
double texture_value(std::uint64_t seed, double s, double t);

/// Intensity of the surface hit, or nullopt for a miss.
std::optional<double> shade(const Scene& scene, const kernels::RayHit& hit);

/// Nearest-hit ray caster over a scene.
class RayCaster {
 public:
  explicit RayCaster(const Scene& scene);
  void cast(std::span<const kernels::Ray> rays, std::span<kernels::RayHit> hits) const;
  kernels::RayHit cast(const kernels::Ray& ray) const;
  const std::vector<kernels::RectIntersector>& intersectors() const { return rects_; }

 private:
  std::vector<kernels::RectIntersector> rects_;
};

struct Render {
  Image8 image;
  Image<double> depth;  // distance along the pixel ray, 0 for misses
};

/// Pinhole rendering at world-from-camera `pose`; one ray per pixel center.
Render render(const Scene& scene, const Pose& pose, const CameraIntrinsics& k);
Image8 render_image(const Scene& scene, const Pose& pose, const CameraIntrinsics& k);

struct LidarPattern {
  std::array<double, 16> ring_elevations_deg{};  // -15 .. 15 in 2 degree steps
  double azimuth_step_deg = 0.4;
  double max_range = 100.0;

  LidarPattern();
};

struct ScanNoise {
  double range_sigma = 0.0;  // meters; 0 disables
  std::uint64_t seed = 0;
};

/// One ray per (ring, azimuth) from the sensor at world-from-lidar `pose`;
/// first hits returned in the sensor frame, misses omitted.
LidarScan simulate_scan(const Scene& scene, const Pose& pose, const LidarPattern& pattern,
                        double timestamp = 0.0, const ScanNoise& noise = {});

/// Fixed camera-from-lidar mounting: LiDAR axes x forward / y left / z up,
/// mounted `height` meters above the camera.
Pose default_extrinsic(double height = 0.15);

/// Camera (z forward, x right, y down) at `position` looking along heading
/// `yaw` in the world xy-plane (z up).
Eigen::Quaterniond camera_orientation(double yaw, double pitch = 0.0, double roll = 0.0);

struct PathSample {
  Vector3 position;
  double yaw = 0.0;
};

/// Polyline in the xy-plane with circular fillets of `corner_radius` at
/// interior vertices, sampled by arc length.
class FilletPath {
 public:
  FilletPath(std::vector<Eigen::Vector2d> vertices, bool closed, double corner_radius, double z);

  double length() const { return length_; }
  PathSample at(double s) const;

 private:
  struct Segment {
    bool arc = false;
    double length = 0.0;
    Eigen::Vector2d start;  // line start
    Eigen::Vector2d dir;    // line direction
    Eigen::Vector2d center; // arc center
    double radius = 0.0;
    double angle0 = 0.0;    // arc start angle around center
    double turn = 0.0;      // signed swept angle
  };
  std::vector<Segment> segments_;
  double length_ = 0.0;
  double z_ = 0.0;
  bool closed_ = false;
};

/// Centerline of the LoopCorridor scene.
FilletPath loop_centerline(const SceneSpec& spec, double z);

struct TrajectorySpec {
  double scan_spacing = 0.1;     // meters of path between LiDAR scans
  int db_images = 30;
  int queries = 100;
  double speed = 1.0;            // m/s; timestamps = arc length / speed
  double camera_height = 1.2;
  double query_lateral_max = 0.5;
  double query_vertical_max = 0.05;
  double query_yaw_max_deg = 3.0;
  double query_tilt_max_deg = 1.0;  // pitch and roll
  double query_time_offset = 0.0;

  void validate() const;  // throws InvalidSpec
};

struct TrajectorySet {
  Trajectory lidar_traj;     // world-from-lidar, closed path end == start
  Trajectory db_poses;       // world-from-camera, uniform in arc length
  Trajectory query_poses;    // world-from-camera, perturbed off the path
  std::vector<double> query_arc;  // arc position of each query
};

TrajectorySet generate_trajectory(const FilletPath& path, const TrajectorySpec& spec, const Pose& extrinsic,
                                  std::uint64_t seed);
/// Loop trajectory along the corridor scene's centerline.
TrajectorySet generate_trajectory(const SceneSpec& scene, const TrajectorySpec& spec, const Pose& extrinsic,
                                  std::uint64_t seed);

struct DatasetSpec {
  SceneSpec scene;
  TrajectorySpec trajectory;
  CameraIntrinsics camera{200.0, 200.0, 159.5, 119.5, 320, 240};
  LidarPattern lidar;
  ScanNoise scan_noise;
  double lidar_mount_height = 0.15;

  /// 380 m loop, 300 database images, 300 queries.
  static DatasetSpec full_scale();
};

struct Dataset {
  CameraIntrinsics camera;
  Pose extrinsic;  // camera-from-lidar
  std::vector<LidarScan> scans;  // points rounded to float, as stored on disk
  Trajectory lidar_traj;
  Trajectory db_poses;
  std::vector<Image8> db_images;
  Trajectory query_gt;
  std::vector<Image8> query_images;
};

Dataset generate_dataset(const DatasetSpec& spec, std::uint64_t seed);

}  // namespace cloudvision::synth
