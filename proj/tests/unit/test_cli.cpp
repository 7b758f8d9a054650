#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cloudvision/cli.hpp"
#include "cloudvision/dataset.hpp"
#include "cloudvision/trajectory.hpp"
#include "support.hpp"

using namespace cloudvision;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// One generated dataset with its map and database, shared by the cases.
struct Pipeline {
  cvtest::TempDir dir{"cli"};
  DatasetLayout data{dir / "data"};
  fs::path map = dir / "out" / "map.cvmap";
  fs::path db = dir / "out" / "db.cvdb";

  Pipeline() {
    REQUIRE(run({"synth", "gen", "--out", data.root.string(), "--queries", "4", "--seed", "5"}).code == 0);
    REQUIRE(run({"map", "build", "--scans", data.scans_dir().string(), "--lidar-traj", data.lidar_traj().string(),
                 "--db-poses", data.db_traj().string(), "--intrinsics", data.intrinsics().string(), "--out",
                 map.string()})
                .code == 0);
    REQUIRE(run({"db", "build", "--images", data.db_images_dir().string(), "--poses", data.db_traj().string(),
                 "--out", db.string()})
                .code == 0);
  }

  std::vector<std::string> localize_args() const {
    return {"localize",     "--map", map.string(), "--db", db.string(), "--db-images", data.db_images_dir().string(),
            "--intrinsics", data.intrinsics().string()};
  }
};

Pipeline& pipeline() {
  static Pipeline p;
  return p;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full pipeline writes a report") {
  Pipeline& p = pipeline();
  CHECK(fs::file_size(p.map) > 26);
  CHECK(fs::file_size(p.db) > 19);
  auto args = p.localize_args();
  const fs::path est = p.dir / "out" / "est.tum";
  const fs::path diag = p.dir / "out" / "diag.jsonl";
  args.insert(args.end(), {"--batch", p.data.query_images_dir().string(), "--out", est.string(), "--diagnostics",
                           diag.string()});
  const Run loc = run(args);
  REQUIRE(loc.code == 0);
  CHECK(read_tum(est).size() >= 3);
  std::istringstream lines(slurp(diag));
  int n = 0;
  for (std::string line; std::getline(lines, line);) ++n;
  CHECK(n == 4);

  const fs::path stem = p.dir / "out" / "report";
  const Run ev = run({"evaluate", "--est", est.string(), "--gt", p.data.query_gt().string(), "--out", stem.string()});
  REQUIRE(ev.code == 0);
  CHECK(fs::exists(stem.string() + ".json"));
  CHECK(fs::exists(stem.string() + ".csv"));
  CHECK(fs::exists(stem.string() + ".svg"));
  CHECK(ev.out.find("queries 4") != std::string::npos);
}

TEST_CASE("a database image localizes onto its own pose") {
  Pipeline& p = pipeline();
  const auto images = list_images(p.data.db_images_dir());
  const Trajectory poses = read_tum(p.data.db_traj());
  auto args = p.localize_args();
  args.insert(args.end(), {"--query", images[6].string()});
  const Run r = run(args);
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const Trajectory est = parse_tum(in);
  REQUIRE(est.size() == 1);
  CHECK(std::abs(est[0].timestamp - poses[6].timestamp) < 1e-6);
  CHECK((est[0].pose.translation - poses[6].pose.translation).norm() < 1e-6);
  CHECK(est[0].pose.rotation.angularDistance(poses[6].pose.rotation) < 1e-6);
}

TEST_CASE("evaluating ground truth against itself") {
  Pipeline& p = pipeline();
  const fs::path stem = p.dir / "self";
  const Run r = run({"evaluate", "--est", p.data.query_gt().string(), "--gt", p.data.query_gt().string(), "--out",
                     stem.string(), "--thresholds", "0.01:0.1"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("median 0 m / 0 deg") != std::string::npos);
  CHECK(r.out.find("= 100%") != std::string::npos);
}

TEST_CASE("usage errors exit with 1") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"synth", "gen"}).code == 1);
  CHECK(run({"evaluate", "--est", "/nonexistent/a.tum", "--gt", "/nonexistent/b.tum", "--out", "x"}).code == 1);
  const Run r = run({"map", "build", "--voxel", "-1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("error") != std::string::npos);
  Pipeline& p = pipeline();
  CHECK(run(p.localize_args()).code == 1);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("data errors exit with 2") {
  Pipeline& p = pipeline();
  const fs::path bad = p.dir / "bad.tum";
  std::ofstream(bad) << "0 1 2 3\n";
  const Run r = run({"evaluate", "--est", bad.string(), "--gt", p.data.query_gt().string(), "--out",
                     (p.dir / "bad").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("error") != std::string::npos);

  const fs::path junk = p.dir / "junk.cvmap";
  std::ofstream(junk) << "not a map";
  auto args = p.localize_args();
  args[2] = junk.string();
  args.insert(args.end(), {"--batch", p.data.query_images_dir().string()});
  CHECK(run(args).code == 2);
}

TEST_CASE("synth gen refuses a non-empty output directory") {
  cvtest::TempDir dir("cli_nonempty");
  std::ofstream(dir / "keep.txt") << "x";
  const Run r = run({"synth", "gen", "--out", dir.path().string(), "--queries", "1"});
  CHECK(r.code == 2);
  CHECK(fs::exists(dir / "keep.txt"));
  CHECK_FALSE(fs::exists(dir / "scans"));
}

}  // TEST_SUITE
