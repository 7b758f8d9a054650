#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "cloudvision/geometry.hpp"

namespace cloudvision {

struct TimedPose {
  double timestamp = 0.0;
  Pose pose;
};

using Trajectory = std::vector<TimedPose>;

/// Reads "timestamp tx ty tz qx qy qz qw" lines; blank lines and lines
/// starting with '#' are skipped.
Trajectory read_tum(const std::filesystem::path& path);
Trajectory parse_tum(std::istream& in);
void write_tum(const Trajectory& traj, const std::filesystem::path& path);
void write_tum_line(std::ostream& out, const TimedPose& p);

/// Throws InvalidSpec unless timestamps are strictly increasing.
void check_strictly_increasing(std::span<const TimedPose> traj);

/// Translation lerp + rotation slerp between the bracketing samples.
/// Throws TimestampOutOfRange outside [front, back].
Pose interpolate_pose(std::span<const TimedPose> traj, double t);

/// Index of the sample whose timestamp is closest to t (ties -> earlier).
std::size_t nearest_index(std::span<const TimedPose> traj, double t);

double path_length(std::span<const TimedPose> traj);

}  // namespace cloudvision
