#include "cloudvision/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "binary_io.hpp"
#include "cloudvision/error.hpp"
#include "cloudvision/kernels.hpp"

namespace cloudvision {

namespace {

constexpr std::string_view kDbMagic{"CVDB1\0", 6};
constexpr std::uint32_t kDbVersion = 1;
constexpr int kMinSide = 32;
constexpr double kStdEpsilon = 1e-8;

// Separable triangle-filter weights for one axis. When shrinking, the
// triangle is widened by the scale factor so every input pixel contributes
// (antialiased bilinear); when enlarging it reduces to plain bilinear.
struct AxisTaps {
  std::vector<int> first;
  std::vector<std::vector<double>> weights;
};

AxisTaps triangle_taps(int in, int out) {
  const double scale = static_cast<double>(in) / out;
  const double support = std::max(scale, 1.0);
  AxisTaps taps;
  taps.first.resize(static_cast<std::size_t>(out));
  taps.weights.resize(static_cast<std::size_t>(out));
  for (int o = 0; o < out; ++o) {
    const double center = (o + 0.5) * scale;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(in - 1, static_cast<int>(std::ceil(center + support)));
    std::vector<double> w;
    double sum = 0.0;
    for (int i = lo; i <= hi; ++i) {
      const double d = std::abs((i + 0.5 - center) / support);
      w.push_back(d < 1.0 ? 1.0 - d : 0.0);
      sum += w.back();
    }
    if (sum <= 0.0) {  // degenerate: nearest pixel
      w.assign(w.size(), 0.0);
      w[static_cast<std::size_t>(std::clamp(static_cast<int>(center), lo, hi) - lo)] = 1.0;
      sum = 1.0;
    }
    for (double& x : w) x /= sum;
    taps.first[static_cast<std::size_t>(o)] = lo;
    taps.weights[static_cast<std::size_t>(o)] = std::move(w);
  }
  return taps;
}

std::vector<double> resize_bilinear(const ImageF& img, int out_w, int out_h) {
  const AxisTaps tx = triangle_taps(img.width, out_w);
  const AxisTaps ty = triangle_taps(img.height, out_h);
  std::vector<double> rows(static_cast<std::size_t>(out_w) * img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const auto& w = tx.weights[static_cast<std::size_t>(x)];
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * img(tx.first[static_cast<std::size_t>(x)] + static_cast<int>(i), y);
      rows[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto& w = ty.weights[static_cast<std::size_t>(y)];
    const int y0 = ty.first[static_cast<std::size_t>(y)];
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) acc += w[i] * rows[static_cast<std::size_t>(y0 + static_cast<int>(i)) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

GlobalDescriptor l2_normalized(const std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  GlobalDescriptor d;
  d.values.assign(v.size(), 0.0f);
  const double norm = std::sqrt(sq);
  if (norm < 1e-12) return d;
  for (std::size_t i = 0; i < v.size(); ++i) d.values[i] = static_cast<float>(v[i] / norm);
  return d;
}

GlobalDescriptor tiny_descriptor(const ImageF& image) {
  std::vector<double> v = resize_bilinear(image, 32, 32);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  const double stddev = std::sqrt(sq / static_cast<double>(v.size()));
  // Resampling a constant image leaves rounding noise; treat it as flat so
  // every constant image maps to the same (zero) descriptor.
  if (stddev <= 1e-9 * std::max(1.0, std::abs(mean))) return l2_normalized(std::vector<double>(v.size(), 0.0));
  for (double& x : v) x = (x - mean) / (stddev + kStdEpsilon);
  return l2_normalized(v);
}

GlobalDescriptor gradient_histogram_descriptor(const ImageF& image) {
  constexpr int kSide = 128;
  constexpr int kCells = 16;
  constexpr int kCell = kSide / kCells;
  constexpr int kBins = 8;
  const std::vector<double> v = resize_bilinear(image, kSide, kSide);
  std::vector<double> hist(static_cast<std::size_t>(kCells) * kCells * kBins, 0.0);
  auto at = [&](int x, int y) {
    return v[static_cast<std::size_t>(std::clamp(y, 0, kSide - 1)) * kSide + std::clamp(x, 0, kSide - 1)];
  };
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
      const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double angle = std::atan2(gy, gx);
      if (angle < 0.0) angle += 2.0 * std::numbers::pi;
      const int bin = std::min(kBins - 1, static_cast<int>(angle / (2.0 * std::numbers::pi) * kBins));
      const int cell = (y / kCell) * kCells + (x / kCell);
      hist[static_cast<std::size_t>(cell) * kBins + bin] += mag;
    }
  }
  return l2_normalized(hist);
}

}  // namespace

DescriptorKind parse_descriptor_kind(const std::string& name) {
  if (name == "tiny") return DescriptorKind::Tiny;
  if (name == "gradhist") return DescriptorKind::GradientHistogram;
  throw Error(ErrorCode::InvalidSpec, "unknown descriptor kind '" + name + "'");
}

std::string to_string(DescriptorKind kind) {
  return kind == DescriptorKind::Tiny ? "tiny" : "gradhist";
}

GlobalDescriptor compute_descriptor(const ImageF& image, DescriptorKind kind) {
  if (image.width < kMinSide || image.height < kMinSide) {
    throw Error(ErrorCode::ImageTooSmall, "descriptor needs at least 32x32 pixels");
  }
  switch (kind) {
    case DescriptorKind::Tiny: return tiny_descriptor(image);
    case DescriptorKind::GradientHistogram: return gradient_histogram_descriptor(image);
  }
  throw Error(ErrorCode::InvalidSpec, "unknown descriptor kind");
}

double cosine_similarity(const GlobalDescriptor& a, const GlobalDescriptor& b) {
  if (a.values.size() != b.values.size()) throw Error(ErrorCode::InvalidSpec, "descriptor size mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += static_cast<double>(a.values[i]) * b.values[i];
    na += static_cast<double>(a.values[i]) * a.values[i];
    nb += static_cast<double>(b.values[i]) * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

void validate_database(const RetrievalDatabase& db) {
  const std::size_t dim = db.dimension();
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    if (db.entries[i].image_id != i) {
      throw Error(ErrorCode::InvalidSpec, "database ids must be dense and ordered; entry " + std::to_string(i));
    }
    if (db.entries[i].descriptor.values.size() != dim) {
      throw Error(ErrorCode::InvalidSpec, "inconsistent descriptor dimension");
    }
  }
}

std::vector<RetrievalHit> query_top_k(const RetrievalDatabase& db, const GlobalDescriptor& q, std::size_t k) {
  if (db.entries.empty()) throw Error(ErrorCode::EmptyDatabase, "retrieval database is empty");
  if (k == 0) throw Error(ErrorCode::InvalidSpec, "k must be at least 1");
  const std::size_t dim = db.dimension();
  if (q.values.size() != dim) throw Error(ErrorCode::InvalidSpec, "query descriptor dimension mismatch");

  std::vector<float> flat;
  flat.reserve(db.entries.size() * dim);
  std::vector<double> norms(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) {
    const auto& v = db.entries[i].descriptor.values;
    flat.insert(flat.end(), v.begin(), v.end());
    double sq = 0.0;
    for (float x : v) sq += static_cast<double>(x) * x;
    norms[i] = std::sqrt(sq);
  }
  double qn = 0.0;
  for (float x : q.values) qn += static_cast<double>(x) * x;
  qn = std::sqrt(qn);

  std::vector<double> sims(db.entries.size());
  kernels::dot_products(flat, q.values, dim, sims);

  std::vector<RetrievalHit> hits(db.entries.size());
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const double denom = norms[i] * qn;
    hits[i] = {static_cast<ImageId>(i), denom > 0.0 ? std::clamp(sims[i] / denom, -1.0, 1.0) : 0.0};
  }
  const std::size_t n = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(),
                    [](const RetrievalHit& a, const RetrievalHit& b) {
                      if (a.similarity != b.similarity) return a.similarity > b.similarity;
                      return a.image_id < b.image_id;
                    });
  hits.resize(n);
  return hits;
}

void save_database(const RetrievalDatabase& db, const std::filesystem::path& path) {
  validate_database(db);
  detail::ByteWriter w;
  w.bytes(kDbMagic);
  w.u32(kDbVersion);
  w.u32(static_cast<std::uint32_t>(db.entries.size()));
  w.u32(static_cast<std::uint32_t>(db.dimension()));
  w.u8(static_cast<std::uint8_t>(db.kind));
  for (const auto& e : db.entries) {
    w.u32(e.image_id);
    for (float v : e.descriptor.values) w.f32(v);
    w.f64(e.pose.timestamp);
    const auto& t = e.pose.pose.translation;
    const auto& q = e.pose.pose.rotation;
    for (double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) w.f64(v);
  }
  w.write_file(path);
}

RetrievalDatabase load_database(const std::filesystem::path& path) {
  auto r = detail::ByteReader::from_file(path);
  if (!r.magic(kDbMagic)) throw Error(ErrorCode::BadMagic, "not a retrieval database: " + path.string());
  const std::uint32_t version = r.u32();
  if (version != kDbVersion) throw Error(ErrorCode::BadMagic, "unsupported database version");
  const std::uint32_t m = r.u32();
  const std::uint32_t d = r.u32();
  const std::uint8_t kind = r.u8();
  if (kind > 1) throw Error(ErrorCode::Parse, "unknown descriptor kind tag " + std::to_string(kind));
  RetrievalDatabase db;
  db.kind = static_cast<DescriptorKind>(kind);
  db.entries.resize(m);
  for (auto& e : db.entries) {
    e.image_id = r.u32();
    e.descriptor.values.resize(d);
    for (float& v : e.descriptor.values) v = r.f32();
    e.pose.timestamp = r.f64();
    double p[7];
    for (double& v : p) v = r.f64();
    // Stored quaternions are already unit length; keep them bit-exact.
    e.pose.pose.translation = Vector3(p[0], p[1], p[2]);
    e.pose.pose.rotation = Eigen::Quaterniond(p[6], p[3], p[4], p[5]);
  }
  if (r.remaining() != 0) throw Error(ErrorCode::Parse, "trailing bytes in " + path.string());
  validate_database(db);
  return db;
}

}  // namespace cloudvision
