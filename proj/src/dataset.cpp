#include "cloudvision/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "cloudvision/error.hpp"
#include "cloudvision/report_io.hpp"

namespace cloudvision {

namespace {

using nlohmann::json;

std::string scene_kind_name(synth::SceneKind k) {
  switch (k) {
    case synth::SceneKind::Room: return "room";
    case synth::SceneKind::TwoRooms: return "two_rooms";
    case synth::SceneKind::LoopCorridor: return "loop";
  }
  return "loop";
}

synth::SceneKind scene_kind_from(const std::string& s) {
  if (s == "room") return synth::SceneKind::Room;
  if (s == "two_rooms") return synth::SceneKind::TwoRooms;
  if (s == "loop") return synth::SceneKind::LoopCorridor;
  throw Error(ErrorCode::Parse, "unknown scene kind '" + s + "'");
}

json pose_json(const Pose& p) {
  return {{"t", {p.translation.x(), p.translation.y(), p.translation.z()}},
          {"q", {p.rotation.x(), p.rotation.y(), p.rotation.z(), p.rotation.w()}}};
}

Pose pose_from(const json& j) {
  const auto& t = j.at("t");
  const auto& q = j.at("q");
  return Pose(Eigen::Quaterniond(q.at(3).get<double>(), q.at(0).get<double>(), q.at(1).get<double>(),
                                 q.at(2).get<double>())
                  .normalized(),
              Vector3(t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()));
}

std::string numbered(const char* prefix, std::size_t i, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu%s", prefix, i, ext);
  return buf;
}

std::vector<Image8> load_images(const std::filesystem::path& dir, std::span<const TimedPose> poses) {
  const auto files = list_images(dir);
  if (files.size() != poses.size()) {
    throw Error(ErrorCode::InvalidSpec, dir.string() + ": " + std::to_string(files.size()) + " images for " +
                                            std::to_string(poses.size()) + " poses");
  }
  std::vector<Image8> out;
  out.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    PgmFile f = read_pgm(files[i]);
    if (f.timestamp && std::abs(*f.timestamp - poses[i].timestamp) > 1e-6) {
      throw Error(ErrorCode::InvalidSpec, files[i].string() + ": timestamp does not match its pose");
    }
    out.push_back(std::move(f.image));
  }
  return out;
}

}  // namespace

json dataset_spec_to_json(const synth::DatasetSpec& spec, std::uint64_t seed) {
  const auto& s = spec.scene;
  const auto& t = spec.trajectory;
  const auto& k = spec.camera;
  json j;
  j["seed"] = seed;
  j["scene"] = {{"kind", scene_kind_name(s.kind)},
                {"room_dims", {s.room_dims.x(), s.room_dims.y(), s.room_dims.z()}},
                {"doorway_width", s.doorway_width},
                {"doorway_height", s.doorway_height},
                {"loop_length", s.loop_length},
                {"aspect", s.aspect},
                {"corner_radius", s.corner_radius},
                {"corridor_width", s.corridor_width},
                {"height", s.height},
                {"panel_length", s.panel_length},
                {"clutter_density", s.clutter_density}};
  j["trajectory"] = {{"scan_spacing", t.scan_spacing},
                     {"db_images", t.db_images},
                     {"queries", t.queries},
                     {"speed", t.speed},
                     {"camera_height", t.camera_height},
                     {"query_lateral_max", t.query_lateral_max},
                     {"query_vertical_max", t.query_vertical_max},
                     {"query_yaw_max_deg", t.query_yaw_max_deg},
                     {"query_tilt_max_deg", t.query_tilt_max_deg},
                     {"query_time_offset", t.query_time_offset}};
  j["camera"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  j["lidar"] = {{"ring_elevations_deg", spec.lidar.ring_elevations_deg},
                {"azimuth_step_deg", spec.lidar.azimuth_step_deg},
                {"max_range", spec.lidar.max_range}};
  j["scan_noise"] = {{"range_sigma", spec.scan_noise.range_sigma}, {"seed", spec.scan_noise.seed}};
  j["lidar_mount_height"] = spec.lidar_mount_height;
  j["extrinsic_camera_from_lidar"] = pose_json(synth::default_extrinsic(spec.lidar_mount_height));
  return j;
}

synth::DatasetSpec dataset_spec_from_json(const json& j, std::uint64_t* seed) {
  synth::DatasetSpec spec;
  try {
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    const auto& s = j.at("scene");
    spec.scene.kind = scene_kind_from(s.at("kind").get<std::string>());
    const auto& d = s.at("room_dims");
    spec.scene.room_dims = Vector3(d.at(0).get<double>(), d.at(1).get<double>(), d.at(2).get<double>());
    spec.scene.doorway_width = s.at("doorway_width").get<double>();
    spec.scene.doorway_height = s.at("doorway_height").get<double>();
    spec.scene.loop_length = s.at("loop_length").get<double>();
    spec.scene.aspect = s.at("aspect").get<double>();
    spec.scene.corner_radius = s.at("corner_radius").get<double>();
    spec.scene.corridor_width = s.at("corridor_width").get<double>();
    spec.scene.height = s.at("height").get<double>();
    spec.scene.panel_length = s.at("panel_length").get<double>();
    spec.scene.clutter_density = s.at("clutter_density").get<double>();
    const auto& t = j.at("trajectory");
    spec.trajectory.scan_spacing = t.at("scan_spacing").get<double>();
    spec.trajectory.db_images = t.at("db_images").get<int>();
    spec.trajectory.queries = t.at("queries").get<int>();
    spec.trajectory.speed = t.at("speed").get<double>();
    spec.trajectory.camera_height = t.at("camera_height").get<double>();
    spec.trajectory.query_lateral_max = t.at("query_lateral_max").get<double>();
    spec.trajectory.query_vertical_max = t.at("query_vertical_max").get<double>();
    spec.trajectory.query_yaw_max_deg = t.at("query_yaw_max_deg").get<double>();
    spec.trajectory.query_tilt_max_deg = t.at("query_tilt_max_deg").get<double>();
    spec.trajectory.query_time_offset = t.at("query_time_offset").get<double>();
    const auto& k = j.at("camera");
    spec.camera = {k.at("fx").get<double>(), k.at("fy").get<double>(), k.at("cx").get<double>(),
                   k.at("cy").get<double>(), k.at("width").get<int>(),  k.at("height").get<int>()};
    const auto& l = j.at("lidar");
    spec.lidar.ring_elevations_deg = l.at("ring_elevations_deg").get<std::array<double, 16>>();
    spec.lidar.azimuth_step_deg = l.at("azimuth_step_deg").get<double>();
    spec.lidar.max_range = l.at("max_range").get<double>();
    spec.scan_noise.range_sigma = j.at("scan_noise").at("range_sigma").get<double>();
    spec.scan_noise.seed = j.at("scan_noise").at("seed").get<std::uint64_t>();
    spec.lidar_mount_height = j.at("lidar_mount_height").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("scene.json: ") + e.what());
  }
  spec.scene.validate();
  spec.trajectory.validate();
  return spec;
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pgm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_dataset(const synth::Dataset& ds, const synth::DatasetSpec& spec, std::uint64_t seed,
                   const std::filesystem::path& root) {
  const DatasetLayout layout{root};
  for (const auto& dir : {layout.scans_dir(), layout.db_images_dir(), layout.query_images_dir()}) {
    std::filesystem::create_directories(dir);
  }
  write_text_file(layout.scene_json(), dataset_spec_to_json(spec, seed).dump(2) + "\n");
  for (std::size_t i = 0; i < ds.scans.size(); ++i) {
    save_scan(ds.scans[i], layout.scans_dir() / numbered("scan", i, ".cvsc"));
  }
  for (std::size_t i = 0; i < ds.db_images.size(); ++i) {
    write_pgm(ds.db_images[i], layout.db_images_dir() / numbered("db", i, ".pgm"), ds.db_poses[i].timestamp);
  }
  for (std::size_t i = 0; i < ds.query_images.size(); ++i) {
    write_pgm(ds.query_images[i], layout.query_images_dir() / numbered("query", i, ".pgm"),
              ds.query_gt[i].timestamp);
  }
  write_tum(ds.lidar_traj, layout.lidar_traj());
  write_tum(ds.db_poses, layout.db_traj());
  write_tum(ds.query_gt, layout.query_gt());
  save_intrinsics(ds.camera, layout.intrinsics());
}

synth::Dataset load_dataset(const std::filesystem::path& root) {
  const DatasetLayout layout{root};
  std::ifstream in(layout.scene_json());
  if (!in) throw Error(ErrorCode::Io, "cannot read " + layout.scene_json().string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("scene.json: ") + e.what());
  }
  synth::Dataset ds;
  ds.extrinsic = j.contains("extrinsic_camera_from_lidar") ? pose_from(j["extrinsic_camera_from_lidar"])
                                                          : synth::default_extrinsic();
  ds.camera = load_intrinsics(layout.intrinsics());
  ds.lidar_traj = read_tum(layout.lidar_traj());
  ds.db_poses = read_tum(layout.db_traj());
  ds.query_gt = read_tum(layout.query_gt());
  ds.scans = load_scan_directory(layout.scans_dir());
  ds.db_images = load_images(layout.db_images_dir(), ds.db_poses);
  ds.query_images = load_images(layout.query_images_dir(), ds.query_gt);
  return ds;
}

}  // namespace cloudvision
