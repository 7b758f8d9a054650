#include "cloudvision/mapcloud.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "cloudvision/error.hpp"
#include "cloudvision/kernels.hpp"

namespace cloudvision {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

void merge_tags(TagSet& into, std::span<const ImageId> tags) {
  for (ImageId t : tags) {
    auto it = std::lower_bound(into.begin(), into.end(), t);
    if (it == into.end() || *it != t) into.insert(it, t);
  }
}

/// Streaming voxel grid: centroid sums and tag unions in first-occupancy order.
class VoxelAccumulator {
 public:
  explicit VoxelAccumulator(double voxel_size) : inv_size_(1.0 / voxel_size) {}

  void add(const Vector3& p, std::span<const ImageId> tags) {
    const VoxelKey key{static_cast<std::int64_t>(std::floor(p.x() * inv_size_)),
                       static_cast<std::int64_t>(std::floor(p.y() * inv_size_)),
                       static_cast<std::int64_t>(std::floor(p.z() * inv_size_))};
    auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(sums_.size()));
    if (inserted) {
      sums_.push_back(Vector3::Zero());
      counts_.push_back(0);
      tags_.emplace_back();
    }
    const std::uint32_t v = it->second;
    sums_[v] += p;
    ++counts_[v];
    merge_tags(tags_[v], tags);
  }

  DownsampleResult finish() && {
    DownsampleResult out;
    out.points.resize(sums_.size());
    for (std::size_t i = 0; i < sums_.size(); ++i) out.points[i] = sums_[i] / static_cast<double>(counts_[i]);
    out.tags = std::move(tags_);
    return out;
  }

 private:
  double inv_size_;
  std::unordered_map<VoxelKey, std::uint32_t, VoxelKeyHash> index_;
  std::vector<Vector3> sums_;
  std::vector<std::uint32_t> counts_;
  std::vector<TagSet> tags_;
};

bool finite(const Vector3& p) { return std::isfinite(p.x()) && std::isfinite(p.y()) && std::isfinite(p.z()); }

// Drops tag m from points hidden behind other points tagged m. Each point
// is splatted into camera m's depth buffer over roughly its voxel's pixel
// footprint; a point survives when it is no deeper than the buffer at its
// own pixel plus `tolerance` and a small depth-proportional allowance for
// surfaces seen at grazing angles.
void zbuffer_recheck(const std::vector<Vector3>& points, std::vector<TagSet>& tags, const std::vector<Pose>& cams,
                     const CameraIntrinsics& k, double voxel_size, double tolerance) {
  constexpr double kGrazing = 0.02;
  constexpr int kMaxSplat = 20;
  std::vector<std::vector<std::uint32_t>> members(cams.size());
  for (std::uint32_t i = 0; i < tags.size(); ++i) {
    for (ImageId m : tags[i]) members[m].push_back(i);
  }
  std::vector<float> zbuf(static_cast<std::size_t>(k.width) * k.height);
  struct Pixel {
    int x, y;
    double z;
  };
  std::vector<Pixel> pix;
  for (std::size_t m = 0; m < cams.size(); ++m) {
    const Pose cw = cams[m].inverse();
    std::fill(zbuf.begin(), zbuf.end(), std::numeric_limits<float>::infinity());
    pix.assign(members[m].size(), {0, 0, 0.0});
    for (std::size_t j = 0; j < members[m].size(); ++j) {
      const Vector3 pc = cw * points[members[m][j]];
      if (!(pc.z() > 0.0)) continue;
      const int x = static_cast<int>(std::lround(k.fx * pc.x() / pc.z() + k.cx));
      const int y = static_cast<int>(std::lround(k.fy * pc.y() / pc.z() + k.cy));
      pix[j] = {std::clamp(x, 0, k.width - 1), std::clamp(y, 0, k.height - 1), pc.z()};
      const int r = std::min(kMaxSplat, static_cast<int>(std::lround(0.5 * k.fx * voxel_size / pc.z())));
      for (int yy = std::max(0, y - r); yy <= std::min(k.height - 1, y + r); ++yy) {
        for (int xx = std::max(0, x - r); xx <= std::min(k.width - 1, x + r); ++xx) {
          float& z = zbuf[static_cast<std::size_t>(yy) * k.width + xx];
          z = std::min(z, static_cast<float>(pc.z()));
        }
      }
    }
    for (std::size_t j = 0; j < members[m].size(); ++j) {
      const Pixel& p = pix[j];
      const double limit = zbuf[static_cast<std::size_t>(p.y) * k.width + p.x] + tolerance + kGrazing * p.z;
      if (p.z > 0.0 && p.z <= limit) continue;
      TagSet& t = tags[members[m][j]];
      t.erase(std::lower_bound(t.begin(), t.end(), static_cast<ImageId>(m)));
    }
  }
}

}  // namespace

DownsampleResult voxel_downsample(std::span<const Vector3> points, std::span<const TagSet> tags,
                                  double voxel_size) {
  if (!(voxel_size > 0.0)) throw Error(ErrorCode::InvalidSpec, "voxel_size must be positive");
  if (points.size() != tags.size()) throw Error(ErrorCode::InvalidSpec, "points/tags size mismatch");
  VoxelAccumulator acc(voxel_size);
  for (std::size_t i = 0; i < points.size(); ++i) acc.add(points[i], tags[i]);
  return std::move(acc).finish();
}

IndexedMap map_from_tags(std::span<const Vector3> points, std::span<const TagSet> tags,
                         std::size_t image_count, double voxel_size) {
  IndexedMap map;
  map.voxel_size = voxel_size;
  map.covis.resize(image_count);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (tags[i].empty()) continue;
    const auto idx = static_cast<PointIndex>(map.points.size());
    map.points.push_back(points[i]);
    for (ImageId m : tags[i]) {
      if (m >= image_count) throw Error(ErrorCode::UnknownImageId, "tag " + std::to_string(m));
      map.covis[m].push_back(idx);
    }
  }
  return map;
}

std::vector<Pose> database_camera_poses(std::span<const TimedPose> db_poses, const Pose& extrinsic,
                                        DbPoseFrame frame) {
  std::vector<Pose> cams;
  cams.reserve(db_poses.size());
  const Pose lidar_from_camera = extrinsic.inverse();
  for (const auto& p : db_poses) {
    cams.push_back(frame == DbPoseFrame::Camera ? p.pose : p.pose * lidar_from_camera);
  }
  return cams;
}

IndexedMap build_indexed_map(std::span<const LidarScan> scans, std::span<const TimedPose> lidar_traj,
                             std::span<const TimedPose> db_poses, const CameraIntrinsics& k,
                             const Pose& extrinsic, const MapBuildOptions& options) {
  if (scans.empty()) throw Error(ErrorCode::EmptyInput, "no scans");
  if (db_poses.empty()) throw Error(ErrorCode::EmptyInput, "no database poses");
  if (lidar_traj.empty()) throw Error(ErrorCode::EmptyInput, "empty LiDAR trajectory");
  if (!(options.voxel_size > 0.0)) throw Error(ErrorCode::InvalidSpec, "voxel_size must be positive");
  check_strictly_increasing(lidar_traj);
  check_strictly_increasing(db_poses);
  for (const auto& s : scans) {
    if (s.timestamp < lidar_traj.front().timestamp || s.timestamp > lidar_traj.back().timestamp) {
      throw Error(ErrorCode::TimestampOutOfRange,
                  "scan at t=" + std::to_string(s.timestamp) + " outside the LiDAR trajectory");
    }
  }

  const std::vector<Pose> cams = database_camera_poses(db_poses, extrinsic, options.db_pose_frame);
  VoxelAccumulator acc(options.voxel_size);
  std::vector<Vector3> world;
  std::vector<std::uint8_t> flags;
  const double max_sq = options.max_scan_range * options.max_scan_range;
  for (const auto& scan : scans) {
    const Pose world_from_lidar = interpolate_pose(lidar_traj, scan.timestamp);
    const auto m = static_cast<ImageId>(nearest_index(db_poses, scan.timestamp));
    world.clear();
    for (const auto& p : scan.points) {
      if (finite(p) && p.squaredNorm() <= max_sq) world.push_back(world_from_lidar * p);
    }
    flags.assign(world.size(), 0);
    kernels::covisibility_flags(world, cams[m], k, options.z_min, options.covis_max_range, flags);
    const ImageId tag[1] = {m};
    for (std::size_t i = 0; i < world.size(); ++i) {
      if (flags[i]) acc.add(world[i], tag);
    }
  }

  DownsampleResult ds = std::move(acc).finish();
  if (options.zbuffer_check) {
    zbuffer_recheck(ds.points, ds.tags, cams, k, options.voxel_size, 2.0 * options.voxel_size);
  }
  return map_from_tags(ds.points, ds.tags, db_poses.size(), options.voxel_size);
}

std::vector<std::pair<PointIndex, Vector3>> covisible_points(const IndexedMap& map, ImageId image_id) {
  if (image_id >= map.image_count()) {
    throw Error(ErrorCode::UnknownImageId, "image id " + std::to_string(image_id) + " not in map");
  }
  std::vector<std::pair<PointIndex, Vector3>> out;
  out.reserve(map.covis[image_id].size());
  for (PointIndex i : map.covis[image_id]) out.emplace_back(i, map.points[i]);
  return out;
}

}  // namespace cloudvision
