#include "cloudvision/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "cloudvision/error.hpp"

namespace cloudvision {

void SolverConfig::validate() const {
  const bool ok = max_iters_per_level > 0 && lambda_init > 0 && lambda_up > 1.0 && lambda_down > 0 &&
                  lambda_down < 1.0 && huber_delta > 0 && step_tol > 0 && cost_tol > 0 && min_points > 0 &&
                  max_rejections > 0;
  if (!ok) throw Error(ErrorCode::InvalidSpec, "solver configuration out of range");
}

std::vector<ReferenceObservation> make_reference_observations(const IndexedMap& map, ImageId image_id,
                                                              const Pose& db_pose, const CameraIntrinsics& k,
                                                              const FeaturePyramid& db_pyramid,
                                                              std::size_t min_points) {
  const auto points = covisible_points(map, image_id);
  const Pose cw = db_pose.inverse();
  std::vector<CameraIntrinsics> level_k;
  for (const auto& level : db_pyramid.levels) level_k.push_back(k.scaled(level.scale));

  std::vector<ReferenceObservation> obs;
  obs.reserve(points.size());
  for (const auto& [index, p_w] : points) {
    const Vector3 p_c = cw * p_w;
    ReferenceObservation o;
    o.point_w = p_w;
    o.ref_features.reserve(db_pyramid.levels.size());
    bool ok = true;
    for (std::size_t l = 0; l < db_pyramid.levels.size() && ok; ++l) {
      const Projection pr = project(level_k[l], p_c);
      const auto f = pr.valid ? sample_value(db_pyramid.levels[l], pr.uv) : std::nullopt;
      if (f) {
        o.ref_features.push_back(*f);
      } else {
        ok = false;
      }
    }
    if (ok) obs.push_back(std::move(o));
  }
  if (obs.size() < min_points) {
    throw Error(ErrorCode::InsufficientObservations,
                std::to_string(obs.size()) + " reference observations for image " + std::to_string(image_id));
  }
  return obs;
}

namespace {

struct LevelProblem {
  std::vector<Vector3> points;
  std::vector<FeatureVec> refs;
  const FeatureLevel* level;
  CameraIntrinsics k;
  kernels::RobustLoss loss;

  kernels::NormalEquations evaluate(const Pose& pose, bool with_jacobian) const {
    kernels::LinearizeInput in;
    in.points = points;
    in.refs = refs;
    in.level = level;
    in.k_level = k;
    in.world_from_camera = pose;
    in.loss = loss;
    in.with_jacobian = with_jacobian;
    return kernels::linearize(in);
  }
};

struct LevelOutcome {
  bool converged = false;
  int iterations = 0;
};

LevelOutcome solve_level(const LevelProblem& problem, const SolverConfig& cfg, Pose& pose,
                         std::vector<double>& accepted_costs, kernels::NormalEquations& current) {
  LevelOutcome out;
  current = problem.evaluate(pose, true);
  if (current.inliers < cfg.min_points) {
    throw Error(ErrorCode::InsufficientObservations,
                std::to_string(current.inliers) + " points in bounds, need " + std::to_string(cfg.min_points));
  }
  accepted_costs.push_back(current.cost);
  double lambda = cfg.lambda_init;

  while (out.iterations < cfg.max_iters_per_level) {
    if (current.cost <= cfg.cost_tol) {
      out.converged = true;
      break;
    }
    ++out.iterations;

    bool accepted = false;
    bool any_solved = false;
    Vector6 step = Vector6::Zero();
    kernels::NormalEquations candidate;
    Pose candidate_pose;
    const Vector6 diag = current.hessian.diagonal();
    const double diag_floor = 1e-12 * std::max(1.0, diag.maxCoeff());
    for (int attempt = 0; attempt <= cfg.max_rejections; ++attempt) {
      Matrix6 a = current.hessian;
      for (int i = 0; i < 6; ++i) a(i, i) += lambda * std::max(diag[i], diag_floor);
      const Eigen::LDLT<Matrix6> ldlt(a);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        step = ldlt.solve(-current.gradient);
        if (step.allFinite()) {
          any_solved = true;
          candidate_pose = se3_exp(Twist(step)) * pose;
          candidate = problem.evaluate(candidate_pose, false);
          if (candidate.inliers >= cfg.min_points && candidate.cost < current.cost) {
            accepted = true;
            break;
          }
        }
      }
      lambda *= cfg.lambda_up;
    }

    if (!accepted) {
      if (!any_solved) throw Error(ErrorCode::SingularSystem, "normal equations not solvable");
      break;  // stalled: no decrease reachable from here
    }

    const double previous_cost = current.cost;
    pose = candidate_pose;
    current = problem.evaluate(pose, true);
    accepted_costs.push_back(current.cost);
    lambda = std::max(lambda * cfg.lambda_down, 1e-12);
    if (step.norm() < cfg.step_tol || previous_cost - current.cost <= cfg.cost_tol * previous_cost ||
        current.cost <= cfg.cost_tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace

LocalizationResult refine_pose(const Pose& init, std::span<const ReferenceObservation> observations,
                               const FeaturePyramid& query_pyramid, const CameraIntrinsics& k,
                               const SolverConfig& config) {
  config.validate();
  if (observations.size() < config.min_points) {
    throw Error(ErrorCode::InsufficientObservations,
                std::to_string(observations.size()) + " observations, need " + std::to_string(config.min_points));
  }
  const std::size_t levels = query_pyramid.levels.size();
  for (const auto& o : observations) {
    if (o.ref_features.size() != levels) {
      throw Error(ErrorCode::InvalidSpec, "reference features do not match the query pyramid depth");
    }
  }

  LocalizationResult result;
  result.pose = init;
  LevelProblem problem;
  problem.loss = {config.loss, config.huber_delta};
  problem.points.reserve(observations.size());
  for (const auto& o : observations) problem.points.push_back(o.point_w);

  kernels::NormalEquations last;
  for (std::size_t l = 0; l < levels; ++l) {
    problem.level = &query_pyramid.levels[l];
    problem.k = k.scaled(problem.level->scale);
    problem.refs.clear();
    for (const auto& o : observations) problem.refs.push_back(o.ref_features[l]);

    result.accepted_costs.emplace_back();
    const LevelOutcome outcome = solve_level(problem, config, result.pose, result.accepted_costs.back(), last);
    result.iterations.push_back(outcome.iterations);
    result.inlier_counts.push_back(last.inliers);
    result.converged = outcome.converged;
  }
  result.final_cost = last.cost;
  return result;
}

Localizer::Localizer(const RetrievalDatabase& db, const IndexedMap& map, const CameraIntrinsics& k,
                     DatabaseImageLoader loader, LocalizerOptions options)
    : db_(db),
      map_(map),
      k_(k),
      loader_(std::move(loader)),
      options_(std::move(options)),
      once_(std::make_unique<std::once_flag[]>(db.entries.size())),
      cache_(db.entries.size()) {
  options_.solver.validate();
  if (db.entries.empty()) throw Error(ErrorCode::EmptyDatabase, "retrieval database is empty");
  if (db.entries.size() != map.image_count()) {
    throw Error(ErrorCode::InvalidSpec, "database has " + std::to_string(db.entries.size()) +
                                            " images but the map indexes " + std::to_string(map.image_count()));
  }
}

const std::vector<ReferenceObservation>& Localizer::observations(ImageId image_id) const {
  if (image_id >= db_.entries.size()) {
    throw Error(ErrorCode::UnknownImageId, "image id " + std::to_string(image_id));
  }
  std::call_once(once_[image_id], [&] {
    const FeaturePyramid pyr = build_pyramid(loader_(image_id), options_.pyramid);
    cache_[image_id] = make_reference_observations(map_, image_id, db_.entries[image_id].pose.pose, k_, pyr,
                                                   options_.solver.min_points);
  });
  return cache_[image_id];
}

LocalizationResult Localizer::localize(const ImageF& query) const {
  const GlobalDescriptor q = compute_descriptor(query, db_.kind);
  const auto hits = query_top_k(db_, q, std::max<std::size_t>(1, options_.top_k));
  const ImageId best = hits.front().image_id;
  const auto& obs = observations(best);
  const FeaturePyramid query_pyr = build_pyramid(query, options_.pyramid);
  LocalizationResult result = refine_pose(db_.entries[best].pose.pose, obs, query_pyr, k_, options_.solver);
  result.retrieved_image = best;
  result.retrieval_similarity = hits.front().similarity;
  result.candidates = hits;
  return result;
}

LocalizationResult localize(const ImageF& query, const RetrievalDatabase& db, const IndexedMap& map,
                            const CameraIntrinsics& k, const DatabaseImageLoader& loader,
                            const LocalizerOptions& options) {
  return Localizer(db, map, k, loader, options).localize(query);
}

}  // namespace cloudvision
