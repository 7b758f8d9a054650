#include <algorithm>

#include "binary_io.hpp"
#include "cloudvision/error.hpp"
#include "cloudvision/mapcloud.hpp"

namespace cloudvision {

namespace {
constexpr std::string_view kMapMagic{"CVPM1\0", 6};
constexpr std::string_view kScanMagic{"CVSC1\0", 6};
constexpr std::uint32_t kMapVersion = 1;
constexpr std::uintmax_t kMapHeaderBytes = 6 + 4 + 8 + 4 + 4;
}  // namespace

std::uintmax_t expected_map_file_size(const IndexedMap& map) {
  std::uintmax_t size = kMapHeaderBytes + 24u * map.points.size();
  for (const auto& c : map.covis) size += 4u + 4u * c.size();
  return size;
}

void save_map(const IndexedMap& map, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kMapMagic);
  w.u32(kMapVersion);
  w.f64(map.voxel_size);
  w.u32(static_cast<std::uint32_t>(map.points.size()));
  w.u32(static_cast<std::uint32_t>(map.covis.size()));
  for (const auto& p : map.points) {
    w.f64(p.x());
    w.f64(p.y());
    w.f64(p.z());
  }
  for (const auto& c : map.covis) {
    w.u32(static_cast<std::uint32_t>(c.size()));
    for (PointIndex i : c) w.u32(i);
  }
  w.write_file(path);
}

IndexedMap load_map(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  if (!r.magic(kMapMagic)) throw Error(ErrorCode::BadMagic, "not a map file: " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kMapVersion) {
    throw Error(ErrorCode::BadMagic, "unsupported map version " + std::to_string(version));
  }
  IndexedMap map;
  map.voxel_size = r.f64();
  const std::uint32_t n = r.u32();
  const std::uint32_t m = r.u32();
  if (r.remaining() < 24ull * n) throw Error(ErrorCode::Io, "truncated map points: " + path.string());
  map.points.resize(n);
  for (auto& p : map.points) {
    const double x = r.f64(), y = r.f64(), z = r.f64();
    p = Vector3(x, y, z);
  }
  map.covis.resize(m);
  for (std::uint32_t img = 0; img < m; ++img) {
    const std::uint32_t count = r.u32();
    if (r.remaining() < 4ull * count) throw Error(ErrorCode::Io, "truncated co-visibility index");
    auto& list = map.covis[img];
    list.resize(count);
    for (std::uint32_t j = 0; j < count; ++j) {
      list[j] = r.u32();
      if (list[j] >= n || (j > 0 && list[j] <= list[j - 1])) {
        throw Error(ErrorCode::CorruptIndex, "bad point index in image " + std::to_string(img));
      }
    }
  }
  if (r.remaining() != 0) throw Error(ErrorCode::CorruptIndex, "trailing bytes in " + path.string());
  return map;
}

void save_scan(const LidarScan& scan, const std::filesystem::path& path) {
  detail::ByteWriter w;
  w.bytes(kScanMagic);
  w.f64(scan.timestamp);
  w.u32(static_cast<std::uint32_t>(scan.points.size()));
  for (const auto& p : scan.points) {
    w.f32(static_cast<float>(p.x()));
    w.f32(static_cast<float>(p.y()));
    w.f32(static_cast<float>(p.z()));
  }
  w.write_file(path);
}

LidarScan load_scan(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  if (!r.magic(kScanMagic)) throw Error(ErrorCode::BadMagic, "not a scan file: " + path.string());
  LidarScan scan;
  scan.timestamp = r.f64();
  const std::uint32_t n = r.u32();
  if (r.remaining() != 12ull * n) throw Error(ErrorCode::Io, "scan size mismatch: " + path.string());
  scan.points.resize(n);
  for (auto& p : scan.points) {
    const float x = r.f32(), y = r.f32(), z = r.f32();
    p = Vector3(x, y, z);
  }
  return scan;
}

std::vector<LidarScan> load_scan_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::Io, "not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".cvsc") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LidarScan> scans;
  scans.reserve(files.size());
  for (const auto& f : files) scans.push_back(load_scan(f));
  return scans;
}

}  // namespace cloudvision
