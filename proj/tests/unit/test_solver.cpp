#include <doctest.h>

#include <cmath>

#include "cloudvision/error.hpp"
#include "cloudvision/eval.hpp"
#include "cloudvision/kernels.hpp"
#include "cloudvision/parallel.hpp"
#include "cloudvision/solver.hpp"
#include "scenarios.hpp"
#include "support.hpp"

using namespace cloudvision;

namespace {

bool near_pixel_line(const Vector2& uv) {
  const double fx = uv.x() - std::floor(uv.x()), fy = uv.y() - std::floor(uv.y());
  return fx < 1e-3 || fx > 1 - 1e-3 || fy < 1e-3 || fy > 1 - 1e-3;
}

struct LoopFixture {
  const synth::Dataset& ds = cvtest::loop_dataset(4);
  IndexedMap map = build_indexed_map(ds.scans, ds.lidar_traj, ds.db_poses, ds.camera, ds.extrinsic);
  RetrievalDatabase db = build_database(ds.db_images, ds.db_poses, DescriptorKind::Tiny);
  Localizer localizer{db, map, ds.camera, [this](ImageId id) { return to_float(ds.db_images[id]); }};
};

const LoopFixture& loop_fixture() {
  static const LoopFixture f;
  return f;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("already at the optimum") {
  const auto p = cvtest::make_noiseless_problem(3, 10);
  REQUIRE(p.obs.size() > 1000);
  const LocalizationResult r = refine_pose(p.gt, p.obs, p.pyramid, p.k);
  CHECK(r.converged);
  CHECK(r.final_cost < 1e-12);
  for (int it : r.iterations) CHECK(it <= 2);
  const PoseError e = pose_error(r.pose, p.gt);
  CHECK(e.trans_m < 1e-9);
  CHECK(e.rot_deg < 1e-9);
}

TEST_CASE("recovers a perturbed pose with strictly decreasing costs") {
  int good = 0;
  for (int i = 0; i < 10; ++i) {
    const auto p = cvtest::make_noiseless_problem(i, 10);
    const Pose init = cvtest::perturb(p.gt, 0.3, 5.0, 77 + i);
    const LocalizationResult r = refine_pose(init, p.obs, p.pyramid, p.k);
    const PoseError e = pose_error(r.pose, p.gt);
    good += e.trans_m < 1e-3 && e.rot_deg < 0.05 ? 1 : 0;
    REQUIRE(r.accepted_costs.size() == p.pyramid.levels.size());
    for (const auto& costs : r.accepted_costs) {
      for (std::size_t j = 1; j < costs.size(); ++j) CHECK(costs[j] < costs[j - 1]);
    }
  }
  CHECK(good >= 9);
}

TEST_CASE("residual Jacobian matches finite differences over the twist") {
  std::mt19937_64 rng(21);
  const double h = 1e-6;
  int tested = 0;
  for (int trial = 0; trial < 400 && tested < 100; ++trial) {
    const auto p = cvtest::make_noiseless_problem(trial % 5, 5, 9);
    const Pose w = cvtest::perturb(p.gt, 0.05, 1.0, 500 + trial);
    const FeatureLevel& level = p.pyramid.levels.back();
    const CameraIntrinsics k = p.k.scaled(level.scale);
    std::uniform_int_distribution<std::size_t> pick(0, p.obs.size() - 1);
    const auto& o = p.obs[pick(rng)];
    const FeatureVec ref = o.ref_features.back();

    const auto residual = [&](const Pose& pose, kernels::PointLinearization& out, bool jac) {
      const Pose cw = pose.inverse();
      return kernels::linearize_point(o.point_w, ref, level, k, cw.rotation_matrix(), cw.translation, jac, out);
    };
    kernels::PointLinearization lin;
    if (!residual(w, lin, true)) continue;
    if (near_pixel_line(project(k, w.inverse() * o.point_w).uv)) continue;
    kernels::Matrix36F fd;
    bool ok = true;
    for (int c = 0; c < 6 && ok; ++c) {
      Vector6 d = Vector6::Zero();
      d[c] = h;
      kernels::PointLinearization plus, minus;
      ok = residual(se3_exp(Twist(d)) * w, plus, false) && residual(se3_exp(Twist(Vector6(-d))) * w, minus, false);
      if (ok) fd.col(c) = (plus.residual - minus.residual) / (2 * h);
    }
    if (!ok || lin.jacobian.norm() < 1e-6) continue;
    CHECK((fd - lin.jacobian).norm() / lin.jacobian.norm() < 1e-4);
    ++tested;
  }
  CHECK(tested == 100);
}

TEST_CASE("Huber beats a quadratic loss under outliers") {
  auto p = cvtest::make_noiseless_problem(2, 10);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n(0.0, 2.0);
  for (auto& o : p.obs) {
    if (u(rng) >= 0.3) continue;
    for (auto& f : o.ref_features) f = FeatureVec(n(rng), n(rng), n(rng));
  }
  const Pose init = cvtest::perturb(p.gt, 0.2, 0.0, 32);
  SolverConfig huber;
  SolverConfig quadratic;
  quadratic.loss = kernels::LossKind::Quadratic;
  const double e_huber = pose_error(refine_pose(init, p.obs, p.pyramid, p.k, huber).pose, p.gt).trans_m;
  const double e_quad = pose_error(refine_pose(init, p.obs, p.pyramid, p.k, quadratic).pose, p.gt).trans_m;
  CHECK(e_huber < 0.005);
  CHECK(e_quad > e_huber);
}

TEST_CASE("gauge transform of the world moves the solution rigidly") {
  const auto p = cvtest::make_noiseless_problem(6, 10);
  const Pose init = cvtest::perturb(p.gt, 0.1, 2.0, 41);
  const LocalizationResult a = refine_pose(init, p.obs, p.pyramid, p.k);
  std::mt19937_64 rng(42);
  const Pose g = cvtest::random_pose(rng, 1.0, 3.0);
  auto moved = p.obs;
  for (auto& o : moved) o.point_w = g * o.point_w;
  const LocalizationResult b = refine_pose(g * init, moved, p.pyramid, p.k);
  const PoseError e = pose_error(b.pose, g * a.pose);
  CHECK(e.trans_m < 1e-6);
  CHECK(e.rot_deg < 1e-6 * 180.0 / 3.141592653589793);
}

TEST_CASE("refinement is deterministic across thread counts") {
  const auto p = cvtest::make_noiseless_problem(8, 10);
  const Pose init = cvtest::perturb(p.gt, 0.2, 3.0, 51);
  const int before = thread_count();
  set_thread_count(1);
  const LocalizationResult a = refine_pose(init, p.obs, p.pyramid, p.k);
  set_thread_count(4);
  const LocalizationResult b = refine_pose(init, p.obs, p.pyramid, p.k);
  const LocalizationResult c = refine_pose(init, p.obs, p.pyramid, p.k);
  set_thread_count(before);
  for (const auto* r : {&b, &c}) {
    CHECK(r->pose.rotation.coeffs() == a.pose.rotation.coeffs());
    CHECK(r->pose.translation == a.pose.translation);
    CHECK(r->final_cost == a.final_cost);
    CHECK(r->iterations == a.iterations);
    CHECK(r->accepted_costs == a.accepted_costs);
  }
}

TEST_CASE("configuration and observation checks") {
  const auto p = cvtest::make_noiseless_problem(1, 10, 30);
  SolverConfig bad;
  bad.lambda_down = 1.5;
  CHECK_THROWS_AS((void)refine_pose(p.gt, p.obs, p.pyramid, p.k, bad), Error);
  const std::vector<ReferenceObservation> few(p.obs.begin(), p.obs.begin() + 5);
  try {
    (void)refine_pose(p.gt, few, p.pyramid, p.k);
    FAIL("expected InsufficientObservations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientObservations);
  }
}

TEST_CASE("reference observation on the optical axis") {
  const auto p = cvtest::make_noiseless_problem(0, 10);
  IndexedMap map;
  map.points = {p.gt * Vector3(0, 0, 2.0), p.gt * Vector3(0, 0, -2.0)};
  map.covis = {{0, 1}};
  const auto obs = make_reference_observations(map, 0, p.gt, p.k, p.pyramid, 1);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].point_w == map.points[0]);
  for (std::size_t l = 0; l < p.pyramid.levels.size(); ++l) {
    const CameraIntrinsics kl = p.k.scaled(p.pyramid.levels[l].scale);
    const auto s = sample(p.pyramid.levels[l], Vector2(kl.cx, kl.cy));
    REQUIRE(s.has_value());
    CHECK(obs[0].ref_features[l] == s->f);
  }
  map.covis = {{1}};
  try {
    (void)make_reference_observations(map, 0, p.gt, p.k, p.pyramid, 1);
    FAIL("expected InsufficientObservations");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientObservations);
  }
  CHECK_THROWS_AS((void)make_reference_observations(map, 3, p.gt, p.k, p.pyramid, 1), Error);
}

TEST_CASE("observation count equals a re-projection oracle") {
  const LoopFixture& f = loop_fixture();
  for (ImageId m : {0u, 7u, 19u}) {
    const FeaturePyramid pyr = build_pyramid(to_float(f.ds.db_images[m]));
    const Pose cw = f.ds.db_poses[m].pose.inverse();
    std::size_t expect = 0;
    for (const auto& [i, pw] : covisible_points(f.map, m)) {
      bool all = true;
      for (const auto& level : pyr.levels) {
        const CameraIntrinsics kl = f.ds.camera.scaled(level.scale);
        const Vector3 pc = cw * pw;
        const Vector2 uv(kl.fx * pc.x() / pc.z() + kl.cx, kl.fy * pc.y() / pc.z() + kl.cy);
        all = all && pc.z() > kDefaultMinDepth && uv.x() >= 1 && uv.y() >= 1 && uv.x() <= level.width - 2 &&
              uv.y() <= level.height - 2;
      }
      expect += all ? 1 : 0;
    }
    CHECK(f.localizer.observations(m).size() == expect);
  }
}

TEST_CASE("a database image localizes onto itself") {
  const LoopFixture& f = loop_fixture();
  for (ImageId m : {2u, 11u, 25u}) {
    const LocalizationResult r = f.localizer.localize(to_float(f.ds.db_images[m]));
    CHECK(r.retrieved_image == m);
    CHECK(r.retrieval_similarity == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.converged);
    CHECK(pose_error(r.pose, f.ds.db_poses[m].pose).trans_m < 1e-6);
  }
}

TEST_CASE("a query 0.2 m ahead of a database image lands within 1 cm") {
  const LoopFixture& f = loop_fixture();
  const synth::DatasetSpec spec;
  const synth::Scene scene = synth::generate_scene(spec.scene, 0);
  const synth::FilletPath path = synth::loop_centerline(spec.scene, spec.trajectory.camera_height);
  for (int m : {4, 13, 22}) {
    const double s = path.length() * m / spec.trajectory.db_images + 0.2;
    const synth::PathSample at = path.at(s);
    const Pose gt(synth::camera_orientation(at.yaw), at.position);
    const LocalizationResult r = f.localizer.localize(to_float(synth::render_image(scene, gt, spec.camera)));
    CHECK(r.retrieved_image == static_cast<ImageId>(m));
    CHECK(pose_error(r.pose, gt).trans_m < 0.01);
  }
}

}  // TEST_SUITE
