#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "cloudvision/features.hpp"
#include "cloudvision/geometry.hpp"
#include "cloudvision/kernels.hpp"
#include "cloudvision/mapcloud.hpp"
#include "cloudvision/retrieval.hpp"

namespace cloudvision {

/// A map point with the database-image features observed at its projection.
struct ReferenceObservation {
  Vector3 point_w = Vector3::Zero();
  std::vector<FeatureVec> ref_features;  // one per pyramid level, coarse to fine
};

struct SolverConfig {
  int max_iters_per_level = 100;
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.5;
  double huber_delta = 0.5;  // in standardized feature units
  double step_tol = 1e-8;
  double cost_tol = 1e-9;
  std::size_t min_points = 10;
  int max_rejections = 10;
  kernels::LossKind loss = kernels::LossKind::Huber;

  /// Throws InvalidSpec when a constant is out of range.
  void validate() const;
};

struct LocalizationResult {
  Pose pose;
  bool converged = false;
  double final_cost = 0.0;
  std::vector<int> iterations;               // per level, coarse to fine
  std::vector<std::size_t> inlier_counts;    // per level, at the final pose of that level
  std::vector<std::vector<double>> accepted_costs;  // per level: initial cost, then each accepted step
  ImageId retrieved_image = 0;
  double retrieval_similarity = 0.0;
  std::vector<RetrievalHit> candidates;      // top-k retrieval list
};

/// Projects the points co-visible with `image_id` into the database image at
/// `db_pose` and samples every pyramid level there. Points that fall outside
/// the samplable area at any level are dropped.
///
/// Throws UnknownImageId, and InsufficientObservations when fewer than
/// `min_points` survive.
std::vector<ReferenceObservation> make_reference_observations(const IndexedMap& map, ImageId image_id,
                                                              const Pose& db_pose, const CameraIntrinsics& k,
                                                              const FeaturePyramid& db_pyramid,
                                                              std::size_t min_points = 10);

/// Coarse-to-fine Levenberg-Marquardt on the feature-metric residual
/// F_query(pi(W^-1 p)) - d, with IRLS Huber weights and left-multiplicative
/// SE(3) updates of the world-from-camera pose W.
///
/// Throws InsufficientObservations when fewer than `min_points` points are
/// in bounds at some level, SingularSystem when no damping makes the normal
/// equations solvable.
LocalizationResult refine_pose(const Pose& init, std::span<const ReferenceObservation> observations,
                               const FeaturePyramid& query_pyramid, const CameraIntrinsics& k,
                               const SolverConfig& config = {});

using DatabaseImageLoader = std::function<ImageF(ImageId)>;

struct LocalizerOptions {
  SolverConfig solver;
  PyramidOptions pyramid;
  std::size_t top_k = 1;
};

/// Retrieval + reference extraction + refinement against one prebuilt map.
/// Per-image reference observations are computed once and cached; localize()
/// is safe to call concurrently.
class Localizer {
 public:
  Localizer(const RetrievalDatabase& db, const IndexedMap& map, const CameraIntrinsics& k,
            DatabaseImageLoader loader, LocalizerOptions options = {});

  LocalizationResult localize(const ImageF& query) const;

  /// Cached reference observations of one database image.
  const std::vector<ReferenceObservation>& observations(ImageId image_id) const;

 private:
  const RetrievalDatabase& db_;
  const IndexedMap& map_;
  CameraIntrinsics k_;
  DatabaseImageLoader loader_;
  LocalizerOptions options_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::vector<std::vector<ReferenceObservation>> cache_;
};

LocalizationResult localize(const ImageF& query, const RetrievalDatabase& db, const IndexedMap& map,
                            const CameraIntrinsics& k, const DatabaseImageLoader& loader,
                            const LocalizerOptions& options = {});

}  // namespace cloudvision
