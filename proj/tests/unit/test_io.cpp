#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cloudvision/error.hpp"
#include "cloudvision/image.hpp"
#include "cloudvision/trajectory.hpp"
#include "support.hpp"

using namespace cloudvision;

TEST_SUITE("io") {

TEST_CASE("TUM parse skips comments and blank lines") {
  std::istringstream in("# header\n\n1.0 1 2 3 0 0 0 1\n2.5 4 5 6 0 0 0.7071067811865476 0.7071067811865476\n");
  const Trajectory t = parse_tum(in);
  REQUIRE(t.size() == 2);
  CHECK(t[0].timestamp == 1.0);
  CHECK((t[0].pose.translation - Vector3(1, 2, 3)).norm() == 0.0);
  CHECK((t[1].pose.rotation_matrix() * Vector3::UnitX() - Vector3::UnitY()).norm() < 1e-12);
}

TEST_CASE("TUM parse rejects malformed lines") {
  std::istringstream in("1.0 1 2 3 0 0 0\n");
  CHECK_THROWS_AS((void)parse_tum(in), Error);
}

TEST_CASE("TUM write/read roundtrip") {
  cvtest::TempDir dir("tum");
  std::mt19937_64 rng(1);
  Trajectory t;
  for (int i = 0; i < 20; ++i) t.push_back({0.1 * i + 1000.0, cvtest::random_pose(rng)});
  write_tum(t, dir / "t.tum");
  const Trajectory r = read_tum(dir / "t.tum");
  REQUIRE(r.size() == t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(r[i].timestamp == doctest::Approx(t[i].timestamp).epsilon(1e-12));
    const PoseError e = pose_error(r[i].pose, t[i].pose);
    CHECK(e.trans_m < 1e-8);
    CHECK(e.rot_deg < 1e-6);
  }
}

TEST_CASE("timestamps must increase strictly") {
  Trajectory t{{0.0, {}}, {1.0, {}}, {1.0, {}}};
  CHECK_THROWS_AS(check_strictly_increasing(t), Error);
  t[2].timestamp = 2.0;
  CHECK_NOTHROW(check_strictly_increasing(t));
}

TEST_CASE("interpolation lerps translation and slerps rotation") {
  const Pose a(Eigen::Quaterniond::Identity(), Vector3(0, 0, 0));
  const Pose b(Eigen::Quaterniond(Eigen::AngleAxisd(1.0, Vector3::UnitZ())), Vector3(2, 0, 0));
  const Trajectory t{{10.0, a}, {12.0, b}};
  const Pose m = interpolate_pose(t, 10.5);
  CHECK((m.translation - Vector3(0.5, 0, 0)).norm() < 1e-15);
  CHECK(rotation_angle(m.rotation) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(pose_error(interpolate_pose(t, 12.0), b).rot_deg < 1e-12);
  CHECK_THROWS_AS((void)interpolate_pose(t, 9.99), Error);
  CHECK_THROWS_AS((void)interpolate_pose(t, 12.01), Error);
}

TEST_CASE("nearest index breaks ties toward the earlier sample") {
  const Trajectory t{{0.0, {}}, {1.0, {}}, {2.0, {}}};
  CHECK(nearest_index(t, -5.0) == 0);
  CHECK(nearest_index(t, 0.5) == 0);
  CHECK(nearest_index(t, 0.51) == 1);
  CHECK(nearest_index(t, 7.0) == 2);
}

TEST_CASE("path length sums segment lengths") {
  Trajectory t;
  t.push_back({0.0, Pose(Eigen::Quaterniond::Identity(), Vector3(0, 0, 0))});
  t.push_back({1.0, Pose(Eigen::Quaterniond::Identity(), Vector3(3, 4, 0))});
  t.push_back({2.0, Pose(Eigen::Quaterniond::Identity(), Vector3(3, 4, 2))});
  CHECK(path_length(t) == doctest::Approx(7.0));
}

TEST_CASE("PGM roundtrip keeps pixels and timestamp") {
  cvtest::TempDir dir("pgm");
  Image8 img(7, 5);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = static_cast<std::uint8_t>(i * 37);
  write_pgm(img, dir / "a.pgm", 12.345678);
  const PgmFile r = read_pgm(dir / "a.pgm");
  CHECK(r.image == img);
  REQUIRE(r.timestamp.has_value());
  CHECK(*r.timestamp == doctest::Approx(12.345678).epsilon(1e-12));

  write_pgm(img, dir / "b.pgm");
  CHECK_FALSE(read_pgm(dir / "b.pgm").timestamp.has_value());
}

TEST_CASE("PGM reader rejects other formats") {
  cvtest::TempDir dir("pgmbad");
  {
    std::ofstream f(dir / "p2.pgm");
    f << "P2\n2 2\n255\n0 1 2 3\n";
  }
  CHECK_THROWS_AS((void)read_pgm(dir / "p2.pgm"), Error);
  {
    std::ofstream f(dir / "short.pgm", std::ios::binary);
    f << "P5\n4 4\n255\n" << "abc";
  }
  CHECK_THROWS_AS((void)read_pgm(dir / "short.pgm"), Error);
  CHECK_THROWS_AS((void)read_pgm(dir / "absent.pgm"), Error);
}

}  // TEST_SUITE
