#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cloudvision/image.hpp"
#include "cloudvision/mapcloud.hpp"
#include "cloudvision/trajectory.hpp"

namespace cloudvision {

enum class DescriptorKind : std::uint8_t {
  Tiny = 0,               // 32x32 normalized thumbnail, D = 1024
  GradientHistogram = 1,  // 16x16 cells x 8 orientation bins, D = 2048
};

DescriptorKind parse_descriptor_kind(const std::string& name);
std::string to_string(DescriptorKind kind);

/// L2-normalized global image descriptor. Images without any contrast map
/// to the zero vector.
struct GlobalDescriptor {
  std::vector<float> values;
};

/// Throws ImageTooSmall for images under 32x32.
GlobalDescriptor compute_descriptor(const ImageF& image, DescriptorKind kind = DescriptorKind::Tiny);

double cosine_similarity(const GlobalDescriptor& a, const GlobalDescriptor& b);

struct DatabaseEntry {
  ImageId image_id = 0;
  GlobalDescriptor descriptor;
  TimedPose pose;  // world-from-camera
};

struct RetrievalDatabase {
  DescriptorKind kind = DescriptorKind::Tiny;
  std::vector<DatabaseEntry> entries;  // entries[i].image_id == i

  std::size_t dimension() const { return entries.empty() ? 0 : entries.front().descriptor.values.size(); }
};

/// Validates dense unique ids and consistent dimensions (InvalidSpec).
void validate_database(const RetrievalDatabase& db);

struct RetrievalHit {
  ImageId image_id = 0;
  double similarity = 0.0;
};

/// Exhaustive cosine-similarity ranking, descending, ties by ascending id.
/// Throws EmptyDatabase; k must be >= 1.
std::vector<RetrievalHit> query_top_k(const RetrievalDatabase& db, const GlobalDescriptor& q, std::size_t k);

// "CVDB1\0", u32 version, u32 M, u32 D, u8 kind, then per entry
// { u32 image_id, D x f32, f64 timestamp, 7 x f64 (tx ty tz qx qy qz qw) }.
void save_database(const RetrievalDatabase& db, const std::filesystem::path& path);
RetrievalDatabase load_database(const std::filesystem::path& path);

}  // namespace cloudvision
