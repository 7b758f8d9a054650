#include "cloudvision/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cloudvision/error.hpp"

namespace cloudvision {

Trajectory parse_tum(std::istream& in) {
  Trajectory traj;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ls >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw Error(ErrorCode::Parse, "bad TUM line " + std::to_string(line_no) + ": " + line);
    }
    traj.push_back({t, Pose(Eigen::Quaterniond(qw, qx, qy, qz), Vector3(tx, ty, tz))});
  }
  return traj;
}

Trajectory read_tum(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open trajectory " + path.string());
  return parse_tum(in);
}

void write_tum_line(std::ostream& out, const TimedPose& p) {
  const auto& t = p.pose.translation;
  const auto& q = p.pose.rotation;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", p.timestamp, t.x(),
                t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
  out << buf;
}

void write_tum(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write trajectory " + path.string());
  for (const auto& p : traj) write_tum_line(out, p);
}

void check_strictly_increasing(std::span<const TimedPose> traj) {
  for (std::size_t i = 1; i < traj.size(); ++i) {
    if (!(traj[i].timestamp > traj[i - 1].timestamp)) {
      throw Error(ErrorCode::InvalidSpec, "trajectory timestamps not strictly increasing at index " +
                                              std::to_string(i));
    }
  }
}

Pose interpolate_pose(std::span<const TimedPose> traj, double t) {
  if (traj.empty()) throw Error(ErrorCode::EmptyInput, "empty trajectory");
  if (t < traj.front().timestamp || t > traj.back().timestamp) {
    throw Error(ErrorCode::TimestampOutOfRange, "timestamp " + std::to_string(t) + " outside trajectory");
  }
  auto it = std::lower_bound(traj.begin(), traj.end(), t,
                             [](const TimedPose& p, double v) { return p.timestamp < v; });
  if (it->timestamp == t) return it->pose;
  const TimedPose& b = *it;
  const TimedPose& a = *(it - 1);
  const double alpha = (t - a.timestamp) / (b.timestamp - a.timestamp);
  return Pose(a.pose.rotation.slerp(alpha, b.pose.rotation),
              (1.0 - alpha) * a.pose.translation + alpha * b.pose.translation);
}

std::size_t nearest_index(std::span<const TimedPose> traj, double t) {
  if (traj.empty()) throw Error(ErrorCode::EmptyInput, "empty trajectory");
  auto it = std::lower_bound(traj.begin(), traj.end(), t,
                             [](const TimedPose& p, double v) { return p.timestamp < v; });
  if (it == traj.begin()) return 0;
  if (it == traj.end()) return traj.size() - 1;
  const std::size_t hi = static_cast<std::size_t>(it - traj.begin());
  return (t - traj[hi - 1].timestamp <= it->timestamp - t) ? hi - 1 : hi;
}

double path_length(std::span<const TimedPose> traj) {
  double len = 0.0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    len += (traj[i].pose.translation - traj[i - 1].pose.translation).norm();
  }
  return len;
}

}  // namespace cloudvision
