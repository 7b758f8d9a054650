#include "cloudvision/image.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cloudvision/error.hpp"

namespace cloudvision {

ImageF to_float(const Image8& img) {
  ImageF out(img.width, img.height);
  for (std::size_t i = 0; i < img.data.size(); ++i) out.data[i] = static_cast<float>(img.data[i]);
  return out;
}

namespace {

// Reads the next whitespace-delimited header token, collecting comments.
std::string next_token(std::istream& in, std::optional<double>& timestamp) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
      std::istringstream cs(comment);
      std::string key;
      double t;
      if ((cs >> key >> t) && key == "timestamp") timestamp = t;
      if (!tok.empty()) return tok;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

PgmFile read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open image " + path.string());
  PgmFile file;
  if (next_token(in, file.timestamp) != "P5") {
    throw Error(ErrorCode::BadMagic, "not a binary PGM: " + path.string());
  }
  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(next_token(in, file.timestamp));
    h = std::stoi(next_token(in, file.timestamp));
    maxval = std::stoi(next_token(in, file.timestamp));
  } catch (const std::exception&) {
    throw Error(ErrorCode::Parse, "bad PGM header: " + path.string());
  }
  if (w <= 0 || h <= 0 || maxval != 255) {
    throw Error(ErrorCode::Parse, "unsupported PGM (need 8-bit): " + path.string());
  }
  file.image = Image8(w, h);
  in.read(reinterpret_cast<char*>(file.image.data.data()), static_cast<std::streamsize>(file.image.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(file.image.data.size())) {
    throw Error(ErrorCode::Io, "truncated PGM: " + path.string());
  }
  return file;
}

void write_pgm(const Image8& img, const std::filesystem::path& path, std::optional<double> timestamp) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write image " + path.string());
  out << "P5\n";
  if (timestamp) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "# timestamp %.6f\n", *timestamp);
    out << buf;
  }
  out << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
}

}  // namespace cloudvision
