#pragma once

#include <cstdint>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "cloudvision/synth.hpp"

namespace cloudvision {

/// On-disk layout of a generated dataset:
///   scene.json            generation spec, seed and camera-from-lidar extrinsic
///   scans/scan_NNNNNN.cvsc
///   images_db/db_NNNNNN.pgm, images_query/query_NNNNNN.pgm  ("# timestamp" comment)
///   traj_lidar.tum        world-from-lidar
///   traj_db.tum           world-from-camera of the database images
///   traj_query_gt.tum     world-from-camera of the queries
///   cam.txt               intrinsics
struct DatasetLayout {
  std::filesystem::path root;

  std::filesystem::path scene_json() const { return root / "scene.json"; }
  std::filesystem::path scans_dir() const { return root / "scans"; }
  std::filesystem::path db_images_dir() const { return root / "images_db"; }
  std::filesystem::path query_images_dir() const { return root / "images_query"; }
  std::filesystem::path lidar_traj() const { return root / "traj_lidar.tum"; }
  std::filesystem::path db_traj() const { return root / "traj_db.tum"; }
  std::filesystem::path query_gt() const { return root / "traj_query_gt.tum"; }
  std::filesystem::path intrinsics() const { return root / "cam.txt"; }
};

nlohmann::json dataset_spec_to_json(const synth::DatasetSpec& spec, std::uint64_t seed);
/// Throws Parse / InvalidSpec.
synth::DatasetSpec dataset_spec_from_json(const nlohmann::json& j, std::uint64_t* seed = nullptr);

void write_dataset(const synth::Dataset& ds, const synth::DatasetSpec& spec, std::uint64_t seed,
                   const std::filesystem::path& root);

/// Reads a dataset written by write_dataset. Images are paired with poses by
/// filename order. Throws Io, Parse, InvalidSpec.
synth::Dataset load_dataset(const std::filesystem::path& root);

/// PGM files of a directory in filename order.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

}  // namespace cloudvision
