#include "cloudvision/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "cloudvision/dataset.hpp"
#include "cloudvision/error.hpp"
#include "cloudvision/eval.hpp"
#include "cloudvision/report_io.hpp"

namespace cloudvision::cli {

namespace fs = std::filesystem;

namespace {

struct SynthArgs {
  std::string out;
  std::string scene = "loop";
  bool full_scale = false;
  std::optional<double> loop_length;
  std::optional<int> db_images;
  std::optional<int> queries;
  std::optional<double> lateral;
  double noise = 0.0;
};

struct MapArgs {
  std::string scans, lidar_traj, db_poses, intrinsics, out;
  double voxel = 0.05;
  double covis_range = 30.0;
  std::string variant = "indexed_map";
  bool no_zbuffer = false;
};

struct DbArgs {
  std::string images, poses, out;
  std::string descriptor = "tiny";
};

struct SolverArgs {
  int levels = 3;
  double huber = 0.5;
  std::size_t top_k = 1;
  int max_iters = 100;

  LocalizerOptions options() const {
    LocalizerOptions o;
    o.pyramid.levels = levels;
    o.solver.huber_delta = huber;
    o.solver.max_iters_per_level = max_iters;
    o.top_k = top_k;
    return o;
  }
};

struct LocalizeArgs {
  std::string map, db, db_images, intrinsics;
  std::string query, batch;
  std::string out, diagnostics;
};

struct EvaluateArgs {
  std::string est, gt, out;
  std::string thresholds;
  std::string curve;
};

struct AblateArgs {
  std::string data, out;
  std::string variant;
  std::string descriptor = "tiny";
  std::string thresholds;
  double voxel = 0.05;
};

void add_solver_flags(CLI::App* app, SolverArgs& s) {
  app->add_option("--levels", s.levels, "Pyramid levels")->check(CLI::Range(1, 8));
  app->add_option("--huber", s.huber, "Huber threshold in feature units")->check(CLI::PositiveNumber);
  app->add_option("--top-k", s.top_k, "Retrieval candidates reported in diagnostics")->check(CLI::Range(1, 1000000));
  app->add_option("--max-iters", s.max_iters, "LM iterations per level")->check(CLI::Range(1, 100000));
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

bool dir_has_entries(const fs::path& p) { return fs::exists(p) && !fs::is_empty(p); }

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---- synth gen -------------------------------------------------------------

int cmd_synth_gen(const SynthArgs& a, std::uint64_t seed, std::ostream& out) {
  synth::DatasetSpec spec = a.full_scale ? synth::DatasetSpec::full_scale() : synth::DatasetSpec{};
  if (a.scene == "room") {
    spec.scene.kind = synth::SceneKind::Room;
  } else if (a.scene == "two_rooms") {
    spec.scene.kind = synth::SceneKind::TwoRooms;
  }
  if (a.loop_length) spec.scene.loop_length = *a.loop_length;
  if (a.db_images) spec.trajectory.db_images = *a.db_images;
  if (a.queries) spec.trajectory.queries = *a.queries;
  if (a.lateral) spec.trajectory.query_lateral_max = *a.lateral;
  spec.scan_noise.range_sigma = a.noise;
  spec.scan_noise.seed = seed;
  spec.scene.validate();
  spec.trajectory.validate();
  if (dir_has_entries(a.out)) throw Error(ErrorCode::InvalidSpec, "output directory is not empty: " + a.out);

  const synth::Dataset ds = synth::generate_dataset(spec, seed);
  write_dataset(ds, spec, seed, a.out);
  out << "wrote " << ds.scans.size() << " scans, " << ds.db_images.size() << " database images, "
      << ds.query_images.size() << " queries to " << a.out << "\n";
  return kExitOk;
}

// ---- map build -------------------------------------------------------------

int cmd_map_build(const MapArgs& a, std::ostream& out) {
  const MapVariant variant = parse_map_variant(a.variant);
  const auto scans = load_scan_directory(a.scans);
  const Trajectory lidar = read_tum(a.lidar_traj);
  const Trajectory db = read_tum(a.db_poses);
  const CameraIntrinsics k = load_intrinsics(a.intrinsics);
  MapBuildOptions opt;
  opt.voxel_size = a.voxel;
  opt.covis_max_range = a.covis_range;
  opt.zbuffer_check = !a.no_zbuffer;
  const IndexedMap map = variant == MapVariant::IndexedMap
                             ? build_indexed_map(scans, lidar, db, k, Pose::identity(), opt)
                             : build_raw_scan_map(scans, lidar, db, k, Pose::identity(), opt);
  ensure_parent(a.out);
  save_map(map, a.out);
  std::size_t entries = 0;
  for (const auto& c : map.covis) entries += c.size();
  out << "map: " << map.points.size() << " points, " << map.image_count() << " images, " << entries
      << " co-visibility entries\n";
  return kExitOk;
}

// ---- db build --------------------------------------------------------------

int cmd_db_build(const DbArgs& a, std::ostream& out) {
  const DescriptorKind kind = parse_descriptor_kind(a.descriptor);
  const Trajectory poses = read_tum(a.poses);
  const auto files = list_images(a.images);
  if (files.size() != poses.size()) {
    throw Error(ErrorCode::InvalidSpec, std::to_string(files.size()) + " images but " +
                                            std::to_string(poses.size()) + " poses");
  }
  std::vector<Image8> images;
  for (std::size_t i = 0; i < files.size(); ++i) {
    PgmFile f = read_pgm(files[i]);
    if (f.timestamp && std::abs(*f.timestamp - poses[i].timestamp) > 1e-6) {
      throw Error(ErrorCode::InvalidSpec, files[i].string() + ": timestamp does not match pose " + std::to_string(i));
    }
    images.push_back(std::move(f.image));
  }
  const RetrievalDatabase db = build_database(images, poses, kind);
  ensure_parent(a.out);
  save_database(db, a.out);
  out << "database: " << db.entries.size() << " entries, D = " << db.dimension() << "\n";
  return kExitOk;
}

// ---- localize --------------------------------------------------------------

int cmd_localize(const LocalizeArgs& a, const SolverArgs& s, std::ostream& out) {
  const IndexedMap map = load_map(a.map);
  const RetrievalDatabase db = load_database(a.db);
  const CameraIntrinsics k = load_intrinsics(a.intrinsics);
  const auto db_files = list_images(a.db_images);
  if (db_files.size() != db.entries.size()) {
    throw Error(ErrorCode::InvalidSpec, std::to_string(db_files.size()) + " database images for " +
                                            std::to_string(db.entries.size()) + " database entries");
  }
  std::vector<fs::path> query_files;
  if (!a.batch.empty()) {
    query_files = list_images(a.batch);
  } else {
    query_files.push_back(a.query);
  }
  struct Query {
    std::string name;
    double timestamp;
    ImageF image;
  };
  std::vector<Query> queries;
  for (std::size_t i = 0; i < query_files.size(); ++i) {
    PgmFile f = read_pgm(query_files[i]);
    if (f.image.width != k.width || f.image.height != k.height) {
      throw Error(ErrorCode::InvalidSpec, query_files[i].string() + ": size does not match the intrinsics");
    }
    queries.push_back({query_files[i].filename().string(), f.timestamp.value_or(static_cast<double>(i)),
                       to_float(f.image)});
  }
  const LocalizerOptions options = s.options();
  options.solver.validate();
  const Localizer localizer(
      db, map, k,
      [&](ImageId id) {
        PgmFile f = read_pgm(db_files[id]);
        return to_float(f.image);
      },
      options);

  struct Outcome {
    std::optional<LocalizationResult> result;
    std::optional<std::string> error;
  };
  std::vector<Outcome> outcomes(queries.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(queries.size()); ++i) {
    try {
      outcomes[i].result = localizer.localize(queries[i].image);
    } catch (const Error& e) {
      outcomes[i].error = e.what();
    }
  }

  std::ostringstream tum, diag;
  std::size_t converged = 0;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto& o = outcomes[i];
    diag << diagnostics_line(queries[i].name, o.result ? &*o.result : nullptr, o.error) << "\n";
    if (o.result && o.result->converged) {
      write_tum_line(tum, {queries[i].timestamp, o.result->pose});
      ++converged;
    }
  }
  if (a.out.empty()) {
    out << tum.str();
  } else {
    ensure_parent(a.out);
    write_text_file(a.out, tum.str());
  }
  if (!a.diagnostics.empty()) {
    ensure_parent(a.diagnostics);
    write_text_file(a.diagnostics, diag.str());
  }
  if (!a.out.empty()) out << "localized " << converged << " of " << queries.size() << " queries\n";
  return kExitOk;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  const auto thresholds = a.thresholds.empty() ? default_thresholds() : parse_thresholds(a.thresholds);
  const auto curve = a.curve.empty() ? default_curve_grid() : parse_thresholds(a.curve);
  const Trajectory est = read_tum(a.est);
  const Trajectory gt = read_tum(a.gt);
  const auto records = match_trajectories(est, gt);
  const EvalReport report = compute_report(records, thresholds, curve);
  ensure_parent(a.out);
  write_report_files(report, a.out);
  out << "queries " << report.n_queries << ", converged " << report.n_converged << ", median "
      << format_double(report.median_trans) << " m / " << format_double(report.median_rot) << " deg\n";
  for (const auto& r : report.recall_at) {
    out << "recall@(" << format_double(r.threshold.trans_m) << " m, " << format_double(r.threshold.rot_deg)
        << " deg) = " << format_double(r.recall_pct) << "%\n";
  }
  return kExitOk;
}

// ---- ablate ----------------------------------------------------------------

int cmd_ablate(const AblateArgs& a, const SolverArgs& s, std::ostream& out) {
  std::vector<MapVariant> variants;
  if (a.variant.empty()) {
    variants = {MapVariant::IndexedMap, MapVariant::RawScans};
  } else {
    variants = {parse_map_variant(a.variant)};
  }
  AblationConfig cfg;
  cfg.localizer = s.options();
  cfg.localizer.solver.validate();
  cfg.map.voxel_size = a.voxel;
  cfg.descriptor = parse_descriptor_kind(a.descriptor);
  if (!a.thresholds.empty()) cfg.thresholds = parse_thresholds(a.thresholds);
  const synth::Dataset ds = load_dataset(a.data);

  std::vector<AblationResult> results;
  for (MapVariant v : variants) results.push_back(run_ablation(v, ds, cfg));

  const fs::path stem(a.out);
  ensure_parent(stem);
  write_text_file(fs::path(a.out + ".json"), ablation_to_json(results).dump(2) + "\n");
  for (const auto& r : results) {
    write_text_file(fs::path(a.out + "_" + to_string(r.variant) + ".csv"), curve_csv(r.report));
    write_text_file(fs::path(a.out + "_" + to_string(r.variant) + ".svg"),
                    curve_svg(r.report, to_string(r.variant)));
    out << to_string(r.variant) << ": " << r.map_points << " points, median " << format_double(r.report.median_trans)
        << " m / " << format_double(r.report.median_rot) << " deg, recall " << format_double(r.report.recall_at.front().recall_pct)
        << "%\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Visual localization in LiDAR maps", "cloudvision"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for all randomness")->capture_default_str();
  app.fallthrough();

  SynthArgs synth_args;
  MapArgs map_args;
  DbArgs db_args;
  LocalizeArgs loc_args;
  EvaluateArgs eval_args;
  AblateArgs ablate_args;
  SolverArgs solver_args;

  auto* synth = app.add_subcommand("synth", "Synthetic data")->require_subcommand(1);
  auto* gen = synth->add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--out", synth_args.out, "Output directory")->required();
  gen->add_option("--scene", synth_args.scene, "Scene kind")->check(CLI::IsMember({"loop", "room", "two_rooms"}));
  gen->add_flag("--full-scale", synth_args.full_scale, "380 m loop, 300 database images, 300 queries");
  gen->add_option("--loop-length", synth_args.loop_length, "Loop length in meters");
  gen->add_option("--db-images", synth_args.db_images, "Database image count");
  gen->add_option("--queries", synth_args.queries, "Query count");
  gen->add_option("--lateral", synth_args.lateral, "Maximum lateral query offset in meters");
  gen->add_option("--noise", synth_args.noise, "LiDAR range noise sigma in meters")->check(CLI::NonNegativeNumber);

  auto* map = app.add_subcommand("map", "Point-cloud maps")->require_subcommand(1);
  auto* map_build = map->add_subcommand("build", "Build a co-visibility indexed map");
  map_build->add_option("--scans", map_args.scans, "Directory of .cvsc scans")->required()->check(CLI::ExistingDirectory);
  map_build->add_option("--lidar-traj", map_args.lidar_traj, "World-from-lidar TUM trajectory")
      ->required()
      ->check(CLI::ExistingFile);
  map_build->add_option("--db-poses", map_args.db_poses, "World-from-camera TUM poses of the database images")
      ->required()
      ->check(CLI::ExistingFile);
  map_build->add_option("--intrinsics", map_args.intrinsics, "Camera intrinsics file")
      ->required()
      ->check(CLI::ExistingFile);
  map_build->add_option("--out", map_args.out, "Output map file")->required();
  map_build->add_option("--voxel", map_args.voxel, "Voxel size in meters")->check(CLI::PositiveNumber);
  map_build->add_option("--covis-range", map_args.covis_range, "Co-visibility range in meters")
      ->check(CLI::PositiveNumber);
  map_build->add_option("--variant", map_args.variant, "indexed_map or raw_scans")
      ->check(CLI::IsMember({"indexed_map", "raw_scans"}));
  map_build->add_flag("--no-zbuffer", map_args.no_zbuffer, "Skip the z-buffer occlusion re-check of co-visibility tags");

  auto* db = app.add_subcommand("db", "Retrieval databases")->require_subcommand(1);
  auto* db_build = db->add_subcommand("build", "Build a retrieval database");
  db_build->add_option("--images", db_args.images, "Directory of database PGM images")
      ->required()
      ->check(CLI::ExistingDirectory);
  db_build->add_option("--poses", db_args.poses, "World-from-camera TUM poses, one per image")
      ->required()
      ->check(CLI::ExistingFile);
  db_build->add_option("--out", db_args.out, "Output database file")->required();
  db_build->add_option("--descriptor", db_args.descriptor, "tiny or gradhist")
      ->check(CLI::IsMember({"tiny", "gradhist"}));

  auto* loc = app.add_subcommand("localize", "Localize query images");
  loc->add_option("--map", loc_args.map, "Map file")->required()->check(CLI::ExistingFile);
  loc->add_option("--db", loc_args.db, "Retrieval database")->required()->check(CLI::ExistingFile);
  loc->add_option("--db-images", loc_args.db_images, "Directory of database images")
      ->required()
      ->check(CLI::ExistingDirectory);
  loc->add_option("--intrinsics", loc_args.intrinsics, "Camera intrinsics file")->required()->check(CLI::ExistingFile);
  auto* q = loc->add_option("--query", loc_args.query, "Single query PGM")->check(CLI::ExistingFile);
  auto* b = loc->add_option("--batch", loc_args.batch, "Directory of query PGMs")->check(CLI::ExistingDirectory);
  q->excludes(b);
  loc->add_option("--out", loc_args.out, "TUM output (stdout when omitted)");
  loc->add_option("--diagnostics", loc_args.diagnostics, "Per-query diagnostics, one JSON object per line");
  add_solver_flags(loc, solver_args);

  auto* ev = app.add_subcommand("evaluate", "Compare estimated and ground-truth poses");
  ev->add_option("--est", eval_args.est, "Estimated TUM trajectory")->required()->check(CLI::ExistingFile);
  ev->add_option("--gt", eval_args.gt, "Ground-truth TUM trajectory")->required()->check(CLI::ExistingFile);
  ev->add_option("--out", eval_args.out, "Report path stem (.json, .csv, .svg)")->required();
  ev->add_option("--thresholds", eval_args.thresholds, "Recall thresholds, e.g. 0.05:2,0.1:5 (meters:degrees)");
  ev->add_option("--curve", eval_args.curve, "Curve thresholds, same format");

  auto* ab = app.add_subcommand("ablate", "Indexed map vs. raw scans on a generated dataset");
  ab->add_option("--data", ablate_args.data, "Dataset directory from synth gen")
      ->required()
      ->check(CLI::ExistingDirectory);
  ab->add_option("--out", ablate_args.out, "Report path stem")->required();
  ab->add_option("--variant", ablate_args.variant, "Run one variant only")
      ->check(CLI::IsMember({"indexed_map", "raw_scans"}));
  ab->add_option("--descriptor", ablate_args.descriptor, "tiny or gradhist")
      ->check(CLI::IsMember({"tiny", "gradhist"}));
  ab->add_option("--thresholds", ablate_args.thresholds, "Recall thresholds (meters:degrees)");
  ab->add_option("--voxel", ablate_args.voxel, "Voxel size in meters")->check(CLI::PositiveNumber);
  add_solver_flags(ab, solver_args);

  for (auto* sub : {gen, map_build, db_build, loc, ev, ab}) sub->fallthrough();
  for (auto* sub : {synth, map, db}) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
    if (*loc && loc_args.query.empty() && loc_args.batch.empty()) {
      throw CLI::ValidationError("localize", "one of --query or --batch is required");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_synth_gen(synth_args, seed, out);
    if (*map_build) return cmd_map_build(map_args, out);
    if (*db_build) return cmd_db_build(db_args, out);
    if (*loc) return cmd_localize(loc_args, solver_args, out);
    if (*ev) return cmd_evaluate(eval_args, out);
    if (*ab) return cmd_ablate(ablate_args, solver_args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace cloudvision::cli
