#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "cloudvision/geometry.hpp"
#include "cloudvision/trajectory.hpp"

namespace cloudvision {

struct LidarScan {
  double timestamp = 0.0;
  std::vector<Vector3> points;  // sensor frame, meters
};

using ImageId = std::uint32_t;
using PointIndex = std::uint32_t;

/// LiDAR map whose points carry the ids of the database images that see them.
struct IndexedMap {
  std::vector<Vector3> points;
  /// covis[m]: strictly ascending indices of the points visible from image m.
  std::vector<std::vector<PointIndex>> covis;
  double voxel_size = 0.0;

  std::size_t image_count() const { return covis.size(); }

  friend bool operator==(const IndexedMap&, const IndexedMap&) = default;
};

/// Frame in which the database poses handed to build_indexed_map are given.
enum class DbPoseFrame {
  Camera,  // world-from-camera
  Lidar,   // world-from-lidar; camera pose = pose * extrinsic^-1
};

struct MapBuildOptions {
  double voxel_size = 0.05;
  double covis_max_range = 30.0;
  double z_min = kDefaultMinDepth;
  double max_scan_range = 100.0;
  DbPoseFrame db_pose_frame = DbPoseFrame::Camera;
  /// Re-check tags against a per-image point z-buffer after downsampling,
  /// so points a scan saw from beside the camera but the camera cannot see
  /// lose that camera's tag.
  bool zbuffer_check = true;
};

/// Assembles the world map from scans posed by `lidar_traj`. Each scan is
/// tagged with its temporally nearest database image; a point receives that
/// image's id iff it projects validly into that camera. Tagged points are
/// voxel-downsampled (tags unioned), tags of points occluded in the
/// z-buffer check are removed, and untagged points are dropped.
///
/// `extrinsic` is camera-from-lidar; it is only consulted when the database
/// poses are given in the LiDAR frame.
///
/// Throws EmptyInput (no scans or no database poses) and
/// TimestampOutOfRange (a scan outside the trajectory's time span).
IndexedMap build_indexed_map(std::span<const LidarScan> scans, std::span<const TimedPose> lidar_traj,
                             std::span<const TimedPose> db_poses, const CameraIntrinsics& k,
                             const Pose& extrinsic, const MapBuildOptions& options = {});

/// Points tagged with `image_id`, ascending by index. Throws UnknownImageId.
std::vector<std::pair<PointIndex, Vector3>> covisible_points(const IndexedMap& map, ImageId image_id);

using TagSet = std::vector<ImageId>;  // sorted, unique

struct DownsampleResult {
  std::vector<Vector3> points;
  std::vector<TagSet> tags;
};

/// One centroid per occupied voxel (key = floor(coord / voxel_size)), tag set
/// = union of the members' tags. Output order follows first occupancy.
DownsampleResult voxel_downsample(std::span<const Vector3> points, std::span<const TagSet> tags,
                                  double voxel_size);

/// Map from per-point tag sets; drops points with no tags.
IndexedMap map_from_tags(std::span<const Vector3> points, std::span<const TagSet> tags,
                         std::size_t image_count, double voxel_size);

/// Camera poses (world-from-camera) for the database entries.
std::vector<Pose> database_camera_poses(std::span<const TimedPose> db_poses, const Pose& extrinsic,
                                        DbPoseFrame frame);

// Map file: "CVPM1\0", u32 version, f64 voxel_size, u32 N, u32 M,
// N x 3 f64, then M x {u32 count, count x u32}. Little-endian.
void save_map(const IndexedMap& map, const std::filesystem::path& path);
IndexedMap load_map(const std::filesystem::path& path);
std::uintmax_t expected_map_file_size(const IndexedMap& map);

// Scan file: "CVSC1\0", f64 timestamp, u32 count, count x 3 f32.
void save_scan(const LidarScan& scan, const std::filesystem::path& path);
LidarScan load_scan(const std::filesystem::path& path);
/// All *.cvsc files of a directory in filename order.
std::vector<LidarScan> load_scan_directory(const std::filesystem::path& dir);

}  // namespace cloudvision
