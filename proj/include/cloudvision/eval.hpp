#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloudvision/mapcloud.hpp"
#include "cloudvision/retrieval.hpp"
#include "cloudvision/solver.hpp"
#include "cloudvision/synth.hpp"
#include "cloudvision/trajectory.hpp"

namespace cloudvision {

struct ErrorRecord {
  std::string query_id;
  double trans_err = 0.0;  // meters
  double rot_err = 0.0;    // degrees
  bool converged = false;
};

struct Threshold {
  double trans_m = 0.0;
  double rot_deg = 0.0;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

struct RecallPoint {
  Threshold threshold;
  double recall_pct = 0.0;
};

struct EvalReport {
  double median_trans = 0.0;
  double median_rot = 0.0;
  std::vector<RecallPoint> recall_at;  // requested thresholds, in input order
  std::vector<RecallPoint> curve;      // translation-major grid
  std::size_t n_queries = 0;
  std::size_t n_converged = 0;

  /// Recall at a threshold listed in recall_at or curve; nullopt otherwise.
  std::optional<double> recall(const Threshold& t) const;
};

/// (5 cm, 2 deg).
std::vector<Threshold> default_thresholds();
/// {0.5, 1, 2, 3, 5, 10, 20} cm x {0.25, 0.5, 1, 2, 5} deg.
std::vector<Threshold> default_curve_grid();
/// "0.05:2,0.1:5" -> thresholds (meters:degrees). Throws Parse.
std::vector<Threshold> parse_thresholds(const std::string& csv);

/// Lower medians over all records; recall counts converged records within
/// both limits, divided by the total. Throws EmptyRecords.
EvalReport compute_report(std::span<const ErrorRecord> records,
                          std::span<const Threshold> thresholds = default_thresholds(),
                          std::span<const Threshold> curve = default_curve_grid());

/// Records for an estimated trajectory against ground truth, matched by
/// timestamp (within 1e-6 s). Ground-truth poses without an estimate count as
/// non-converged with infinite error.
std::vector<ErrorRecord> match_trajectories(std::span<const TimedPose> estimate,
                                            std::span<const TimedPose> ground_truth);

struct DriftResult {
  double abs_err = 0.0;  // meters
  double rel_err = 0.0;  // fraction of the path length
};

/// Endpoint gap of a loop trajectory. The path length defaults to the
/// trajectory's own. Throws TooFewPoses and InvalidSpec (length <= 0).
DriftResult loop_drift(std::span<const TimedPose> traj, std::optional<double> path_length = std::nullopt,
                       double measured_gap = 0.0);

enum class MapVariant { IndexedMap, RawScans };

MapVariant parse_map_variant(const std::string& name);  // "indexed_map" | "raw_scans"
std::string to_string(MapVariant v);

/// Per-image point sets taken straight from each database image's temporally
/// nearest scan: no accumulation, no downsampling.
IndexedMap build_raw_scan_map(std::span<const LidarScan> scans, std::span<const TimedPose> lidar_traj,
                              std::span<const TimedPose> db_poses, const CameraIntrinsics& k,
                              const Pose& extrinsic, const MapBuildOptions& options = {});

/// Database of global descriptors for posed images (ids = positions).
RetrievalDatabase build_database(std::span<const Image8> images, std::span<const TimedPose> poses,
                                 DescriptorKind kind);

struct AblationConfig {
  LocalizerOptions localizer;
  MapBuildOptions map;
  DescriptorKind descriptor = DescriptorKind::Tiny;
  std::vector<Threshold> thresholds = default_thresholds();
};

struct AblationResult {
  MapVariant variant = MapVariant::IndexedMap;
  EvalReport report;
  std::vector<ErrorRecord> records;
  Trajectory estimates;           // one per query; the initial pose when refinement failed
  /// Points the variant keeps: every scan point for RawScans, the
  /// downsampled map for IndexedMap.
  std::size_t map_points = 0;
};

/// Localizes every query of `dataset` against a map built per `variant`.
AblationResult run_ablation(MapVariant variant, const synth::Dataset& dataset, const AblationConfig& cfg = {});

}  // namespace cloudvision
