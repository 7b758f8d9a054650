#include "cloudvision/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "cloudvision/error.hpp"

namespace cloudvision {

std::optional<double> EvalReport::recall(const Threshold& t) const {
  for (const auto* list : {&recall_at, &curve}) {
    for (const auto& p : *list) {
      if (p.threshold == t) return p.recall_pct;
    }
  }
  return std::nullopt;
}

std::vector<Threshold> default_thresholds() { return {{0.05, 2.0}}; }

std::vector<Threshold> default_curve_grid() {
  std::vector<Threshold> grid;
  for (double cm : {0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0}) {
    for (double deg : {0.25, 0.5, 1.0, 2.0, 5.0}) grid.push_back({cm / 100.0, deg});
  }
  return grid;
}

namespace {

double parse_double(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v) || v < 0.0) {
    throw Error(ErrorCode::Parse, "bad threshold value '" + std::string(s) + "'");
  }
  return v;
}

double lower_median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>((v.size() - 1) / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::vector<Threshold> parse_thresholds(const std::string& csv) {
  std::vector<Threshold> out;
  std::string_view rest(csv);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorCode::Parse, "threshold '" + std::string(item) + "' is not <meters>:<degrees>");
    }
    out.push_back({parse_double(item.substr(0, colon)), parse_double(item.substr(colon + 1))});
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  if (out.empty()) throw Error(ErrorCode::Parse, "no thresholds given");
  return out;
}

EvalReport compute_report(std::span<const ErrorRecord> records, std::span<const Threshold> thresholds,
                          std::span<const Threshold> curve) {
  if (records.empty()) throw Error(ErrorCode::EmptyRecords, "no records to evaluate");
  EvalReport report;
  report.n_queries = records.size();

  std::vector<double> trans, rot;
  trans.reserve(records.size());
  rot.reserve(records.size());
  for (const auto& r : records) {
    trans.push_back(r.trans_err);
    rot.push_back(r.rot_err);
    report.n_converged += r.converged ? 1 : 0;
  }
  report.median_trans = lower_median(trans);
  report.median_rot = lower_median(rot);

  // Converged records sorted by translation error; each threshold then scans
  // only the prefix within its translation limit.
  std::vector<std::pair<double, double>> ok;
  for (const auto& r : records) {
    if (r.converged) ok.emplace_back(r.trans_err, r.rot_err);
  }
  std::sort(ok.begin(), ok.end());
  const double n = static_cast<double>(records.size());
  auto recall = [&](const Threshold& t) {
    const auto end = std::upper_bound(ok.begin(), ok.end(), std::make_pair(t.trans_m, std::numeric_limits<double>::infinity()));
    const auto hits = std::count_if(ok.begin(), end, [&](const auto& e) { return e.second <= t.rot_deg; });
    return 100.0 * static_cast<double>(hits) / n;
  };
  for (const auto& t : thresholds) report.recall_at.push_back({t, recall(t)});
  for (const auto& t : curve) report.curve.push_back({t, recall(t)});
  return report;
}

std::vector<ErrorRecord> match_trajectories(std::span<const TimedPose> estimate,
                                            std::span<const TimedPose> ground_truth) {
  std::vector<ErrorRecord> out;
  out.reserve(ground_truth.size());
  std::vector<const TimedPose*> sorted;
  for (const auto& e : estimate) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const TimedPose* a, const TimedPose* b) { return a->timestamp < b->timestamp; });
  constexpr double kTol = 1e-6;
  for (const auto& gt : ground_truth) {
    ErrorRecord r;
    char id[64];
    std::snprintf(id, sizeof id, "%.6f", gt.timestamp);
    r.query_id = id;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), gt.timestamp - kTol,
                                     [](const TimedPose* a, double t) { return a->timestamp < t; });
    if (it != sorted.end() && std::abs((*it)->timestamp - gt.timestamp) <= kTol) {
      const PoseError e = pose_error((*it)->pose, gt.pose);
      r.trans_err = e.trans_m;
      r.rot_err = e.rot_deg;
      r.converged = true;
    } else {
      r.trans_err = std::numeric_limits<double>::infinity();
      r.rot_err = std::numeric_limits<double>::infinity();
    }
    out.push_back(std::move(r));
  }
  return out;
}

DriftResult loop_drift(std::span<const TimedPose> traj, std::optional<double> path_length_m, double measured_gap) {
  if (traj.size() < 2) throw Error(ErrorCode::TooFewPoses, "loop drift needs at least two poses");
  const double length = path_length_m ? *path_length_m : path_length(traj);
  if (!(length > 0.0)) throw Error(ErrorCode::InvalidSpec, "path length must be positive");
  DriftResult d;
  d.abs_err = std::abs((traj.back().pose.translation - traj.front().pose.translation).norm() - measured_gap);
  d.rel_err = d.abs_err / length;
  return d;
}

MapVariant parse_map_variant(const std::string& name) {
  if (name == "indexed_map") return MapVariant::IndexedMap;
  if (name == "raw_scans") return MapVariant::RawScans;
  throw Error(ErrorCode::Parse, "unknown map variant '" + name + "'");
}

std::string to_string(MapVariant v) { return v == MapVariant::IndexedMap ? "indexed_map" : "raw_scans"; }

IndexedMap build_raw_scan_map(std::span<const LidarScan> scans, std::span<const TimedPose> lidar_traj,
                              std::span<const TimedPose> db_poses, const CameraIntrinsics& k,
                              const Pose& extrinsic, const MapBuildOptions& options) {
  if (scans.empty()) throw Error(ErrorCode::EmptyInput, "no scans");
  if (db_poses.empty()) throw Error(ErrorCode::EmptyInput, "no database poses");
  if (lidar_traj.empty()) throw Error(ErrorCode::EmptyInput, "empty LiDAR trajectory");
  const std::vector<Pose> cams = database_camera_poses(db_poses, extrinsic, options.db_pose_frame);
  const double max_sq = options.max_scan_range * options.max_scan_range;

  IndexedMap map;
  map.voxel_size = 0.0;
  map.covis.resize(db_poses.size());
  std::vector<Vector3> world;
  std::vector<std::uint8_t> flags;
  for (std::size_t m = 0; m < db_poses.size(); ++m) {
    std::size_t best = 0;
    for (std::size_t s = 1; s < scans.size(); ++s) {
      if (std::abs(scans[s].timestamp - db_poses[m].timestamp) <
          std::abs(scans[best].timestamp - db_poses[m].timestamp)) {
        best = s;
      }
    }
    const LidarScan& scan = scans[best];
    const Pose world_from_lidar = interpolate_pose(lidar_traj, scan.timestamp);
    world.clear();
    for (const auto& p : scan.points) {
      if (p.allFinite() && p.squaredNorm() <= max_sq) world.push_back(world_from_lidar * p);
    }
    flags.assign(world.size(), 0);
    kernels::covisibility_flags(world, cams[m], k, options.z_min, options.covis_max_range, flags);
    for (std::size_t i = 0; i < world.size(); ++i) {
      if (!flags[i]) continue;
      map.covis[m].push_back(static_cast<PointIndex>(map.points.size()));
      map.points.push_back(world[i]);
    }
  }
  return map;
}

RetrievalDatabase build_database(std::span<const Image8> images, std::span<const TimedPose> poses,
                                 DescriptorKind kind) {
  if (images.size() != poses.size()) {
    throw Error(ErrorCode::InvalidSpec, "image and pose counts differ");
  }
  RetrievalDatabase db;
  db.kind = kind;
  db.entries.resize(images.size());
  const auto n = static_cast<std::ptrdiff_t>(images.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    auto& e = db.entries[static_cast<std::size_t>(i)];
    e.image_id = static_cast<ImageId>(i);
    e.descriptor = compute_descriptor(to_float(images[i]), kind);
    e.pose = poses[i];
  }
  return db;
}

AblationResult run_ablation(MapVariant variant, const synth::Dataset& dataset, const AblationConfig& cfg) {
  if (dataset.query_images.size() != dataset.query_gt.size()) {
    throw Error(ErrorCode::InvalidSpec, "query images and ground truth differ in count");
  }
  AblationResult result;
  result.variant = variant;
  IndexedMap map;
  if (variant == MapVariant::IndexedMap) {
    map = build_indexed_map(dataset.scans, dataset.lidar_traj, dataset.db_poses, dataset.camera, dataset.extrinsic,
                            cfg.map);
    result.map_points = map.points.size();
  } else {
    map = build_raw_scan_map(dataset.scans, dataset.lidar_traj, dataset.db_poses, dataset.camera,
                             dataset.extrinsic, cfg.map);
    for (const auto& s : dataset.scans) result.map_points += s.points.size();
  }
  const RetrievalDatabase db = build_database(dataset.db_images, dataset.db_poses, cfg.descriptor);
  const Localizer localizer(db, map, dataset.camera,
                            [&](ImageId id) { return to_float(dataset.db_images[id]); }, cfg.localizer);

  const std::size_t n = dataset.query_images.size();
  result.records.resize(n);
  result.estimates.resize(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t q = 0; q < static_cast<std::ptrdiff_t>(n); ++q) {
    const TimedPose& gt = dataset.query_gt[q];
    ErrorRecord& rec = result.records[q];
    rec.query_id = std::to_string(q);
    TimedPose est{gt.timestamp, Pose::identity()};
    try {
      const LocalizationResult r = localizer.localize(to_float(dataset.query_images[q]));
      est.pose = r.pose;
      rec.converged = r.converged;
    } catch (const Error&) {
      const auto hits = query_top_k(db, compute_descriptor(to_float(dataset.query_images[q]), db.kind), 1);
      est.pose = db.entries[hits.front().image_id].pose.pose;
      rec.converged = false;
    }
    const PoseError e = pose_error(est.pose, gt.pose);
    rec.trans_err = e.trans_m;
    rec.rot_err = e.rot_deg;
    result.estimates[q] = est;
  }
  result.report = compute_report(result.records, cfg.thresholds);
  return result;
}

}  // namespace cloudvision
