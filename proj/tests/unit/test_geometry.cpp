#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "cloudvision/error.hpp"
#include "cloudvision/geometry.hpp"
#include "support.hpp"

using namespace cloudvision;
using cvtest::angle_between;

namespace {

constexpr double kPi = std::numbers::pi;

double pose_gap(const Pose& a, const Pose& b) {
  return angle_between(a.rotation_matrix(), b.rotation_matrix()) + (a.translation - b.translation).norm();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("zero twist is the identity") {
  const Pose p = se3_exp(Twist());
  CHECK(p.rotation.angularDistance(Eigen::Quaterniond::Identity()) == doctest::Approx(0.0));
  CHECK(p.translation.norm() == 0.0);
}

TEST_CASE("pure translation twist") {
  const Pose p = se3_exp(Twist(Vector3(1, 2, 3), Vector3::Zero()));
  CHECK(p.rotation.angularDistance(Eigen::Quaterniond::Identity()) < 1e-15);
  CHECK((p.translation - Vector3(1, 2, 3)).norm() < 1e-15);
  const Twist back = se3_log(p);
  CHECK((back.vector() - (Vector6() << 1, 2, 3, 0, 0, 0).finished()).norm() < 1e-15);
}

TEST_CASE("quarter turn about z matches Rodrigues") {
  const Vector3 phi(0, 0, kPi / 2);
  const Pose p = se3_exp(Twist(Vector3::Zero(), phi));
  CHECK((p.rotation_matrix() - cvtest::rodrigues(phi)).norm() < 1e-14);
  CHECK((p.rotation_matrix() * Vector3::UnitX() - Vector3::UnitY()).norm() < 1e-14);
}

TEST_CASE("so3_exp agrees with Rodrigues for random axes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const Vector3 phi = cvtest::random_unit(rng) * ang(rng);
    CHECK((so3_exp(phi) - cvtest::rodrigues(phi)).norm() < 1e-13);
  }
}

TEST_CASE("se3 exp/log roundtrip over random twists") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ang(0.0, 3.0);
  std::uniform_real_distribution<double> tr(-10.0, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Twist xi(Vector3(tr(rng), tr(rng), tr(rng)), cvtest::random_unit(rng) * ang(rng));
    worst = std::max(worst, (se3_log(se3_exp(xi)).vector() - xi.vector()).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("small angles use the series branch smoothly") {
  for (double a : {0.0, 1e-12, 1e-9, 1e-8, 2e-8, 1e-6}) {
    const Twist xi(Vector3(0.3, -0.2, 0.1), Vector3(a, -a, 0.5 * a));
    const Pose p = se3_exp(xi);
    CHECK(std::abs(p.rotation.norm() - 1.0) < 1e-12);
    CHECK((se3_log(p).vector() - xi.vector()).norm() < 1e-12);
  }
}

TEST_CASE("log of a 2.5 rad pose roundtrips") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Pose p(Eigen::Quaterniond(Eigen::AngleAxisd(2.5, cvtest::random_unit(rng))), Vector3(1, -2, 0.5));
    CHECK(pose_gap(se3_exp(se3_log(p)), p) < 1e-9);
  }
}

TEST_CASE("log near pi throws AngleNearPi") {
  const Pose p(Eigen::Quaterniond(Eigen::AngleAxisd(kPi - 1e-7, Vector3::UnitX())), Vector3::Zero());
  try {
    (void)se3_log(p);
    FAIL("expected AngleNearPi");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AngleNearPi);
  }
  const Pose ok(Eigen::Quaterniond(Eigen::AngleAxisd(kPi - 1e-4, Vector3::UnitX())), Vector3::Zero());
  CHECK_NOTHROW((void)se3_log(ok));
}

TEST_CASE("composition with the inverse is the identity") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Pose p = cvtest::random_pose(rng);
    CHECK(pose_gap(p * p.inverse(), Pose::identity()) < 1e-10);
    CHECK(pose_gap(p.inverse() * p, Pose::identity()) < 1e-10);
    CHECK(std::abs((p * p.inverse()).rotation.norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("composition is associative") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Pose a = cvtest::random_pose(rng), b = cvtest::random_pose(rng), c = cvtest::random_pose(rng);
    CHECK(pose_gap((a * b) * c, a * (b * c)) < 1e-10);
  }
}

TEST_CASE("composition acts like matrix products") {
  std::mt19937_64 rng(4);
  const Pose a = cvtest::random_pose(rng), b = cvtest::random_pose(rng);
  const Vector3 p(0.3, -1.2, 2.0);
  CHECK(((a * b) * p - a * (b * p)).norm() < 1e-12);
  CHECK((a * p - (a.rotation_matrix() * p + a.translation)).norm() < 1e-12);
}

TEST_CASE("projection examples") {
  CameraIntrinsics unit{1, 1, 0, 0, 1, 1};
  const Projection a = project(unit, Vector3(0, 0, 1));
  CHECK(a.valid);
  CHECK(a.uv.norm() == 0.0);

  CameraIntrinsics k{100, 100, 320, 240, 640, 480};
  const Projection b = project(k, Vector3(0.5, -0.25, 2));
  CHECK(b.valid);
  CHECK(b.uv.x() == doctest::Approx(345.0).epsilon(1e-15));
  CHECK(b.uv.y() == doctest::Approx(227.5).epsilon(1e-15));

  CHECK_FALSE(project(k, Vector3(0, 0, -1)).valid);
  CHECK_FALSE(project(k, Vector3(0, 0, 0.04)).valid);
  CHECK_FALSE(project(k, Vector3(10, 0, 1)).valid);
  CHECK_FALSE(project(k, Vector3(0, -10, 1)).valid);
}

TEST_CASE("projection Jacobian matches central differences") {
  CameraIntrinsics k{420, 410, 320, 240, 640, 480};
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> xy(-2.0, 2.0), z(0.1, 10.0);
  const double h = 1e-6;
  for (int i = 0; i < 500; ++i) {
    const Vector3 p(xy(rng), xy(rng), z(rng));
    const Projection pr = project(k, p);
    Matrix23 fd;
    for (int c = 0; c < 3; ++c) {
      Vector3 dp = Vector3::Zero();
      dp[c] = h;
      fd.col(c) = (project(k, p + dp).uv - project(k, p - dp).uv) / (2 * h);
    }
    CHECK((fd - pr.jacobian).norm() / pr.jacobian.norm() < 1e-5);
  }
}

TEST_CASE("pose_error examples and symmetry") {
  std::mt19937_64 rng(7);
  const Pose gt = cvtest::random_pose(rng);
  const PoseError zero = pose_error(gt, gt);
  CHECK(zero.trans_m == 0.0);
  CHECK(zero.rot_deg == doctest::Approx(0.0));

  const Pose rotated(Eigen::Quaterniond(Eigen::AngleAxisd(2.0 * kPi / 180.0, cvtest::random_unit(rng))) * gt.rotation,
                     gt.translation);
  const PoseError two = pose_error(rotated, gt);
  CHECK(two.trans_m == 0.0);
  CHECK(two.rot_deg == doctest::Approx(2.0).epsilon(1e-9));

  for (int i = 0; i < 100; ++i) {
    const Pose a = cvtest::random_pose(rng), b = cvtest::random_pose(rng);
    CHECK(std::abs(pose_error(a, b).rot_deg - pose_error(b, a).rot_deg) < 1e-12);
    CHECK(pose_error(a, b).trans_m == doctest::Approx((a.translation - b.translation).norm()));
  }
}

TEST_CASE("scaled intrinsics follow decimation") {
  CameraIntrinsics k{200, 210, 159.5, 119.5, 321, 240};
  const CameraIntrinsics h = k.scaled(2);
  CHECK(h.width == 161);
  CHECK(h.height == 120);
  CHECK(h.fx == 100.0);
  // pixel (i, j) of the half image is pixel (2i, 2j) of the full one
  const Vector3 p(0.3, -0.2, 2.0);
  CHECK((project(h, p).uv * 2.0 - project(k, p).uv).norm() < 1e-12);
}

TEST_CASE("intrinsics file roundtrip and errors") {
  cvtest::TempDir dir("intr");
  const CameraIntrinsics k{200.25, 201.5, 159.5, 119.5, 320, 240};
  save_intrinsics(k, dir / "cam.txt");
  const CameraIntrinsics r = load_intrinsics(dir / "cam.txt");
  CHECK(r.fx == k.fx);
  CHECK(r.fy == k.fy);
  CHECK(r.cx == k.cx);
  CHECK(r.cy == k.cy);
  CHECK(r.width == k.width);
  CHECK(r.height == k.height);

  {
    std::ofstream f(dir / "extra.txt");
    f << "fx 1\nfy 2\nmodel pinhole\ncx 3\ncy 4\nwidth 5\nheight 6\n";
  }
  CHECK(load_intrinsics(dir / "extra.txt").height == 6);

  {
    std::ofstream f(dir / "missing.txt");
    f << "fx 1\nfy 2\ncx 3\n";
  }
  CHECK_THROWS_AS((void)load_intrinsics(dir / "missing.txt"), Error);
  CHECK_THROWS_AS((void)load_intrinsics(dir / "nope.txt"), Error);
}

}  // TEST_SUITE
