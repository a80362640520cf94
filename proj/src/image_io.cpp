#include "edgeloc/image.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgeloc {

namespace {

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string next_token(const std::string& bytes, std::size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  return bytes.substr(start, pos - start);
}

int parse_positive(const std::string& token, const char* what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(token, &used);
    if (used != token.size() || v <= 0) throw std::invalid_argument(what);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("pgm: invalid ") + what + " '" + token + "'");
  }
}

}  // namespace

ByteImage decode_pgm(const std::string& bytes) {
  std::size_t pos = 0;
  if (next_token(bytes, pos) != "P5") throw std::runtime_error("pgm: expected P5 magic");
  const int width = parse_positive(next_token(bytes, pos), "width");
  const int height = parse_positive(next_token(bytes, pos), "height");
  const int maxval = parse_positive(next_token(bytes, pos), "maxval");
  if (maxval > 255) throw std::runtime_error("pgm: only 8-bit images are supported");
  // Exactly one whitespace byte separates the header from the raster.
  ++pos;
  const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (bytes.size() < pos + count) throw std::runtime_error("pgm: truncated raster");
  ByteImage image(height, width);
  std::copy(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
            bytes.begin() + static_cast<std::ptrdiff_t>(pos + count), image.data());
  return image;
}

std::string encode_pgm(const ByteImage& image) {
  std::string out = "P5\n" + std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.data()), static_cast<std::size_t>(image.size()));
  return out;
}

ByteImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return decode_pgm(ss.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_pgm(const ByteImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << encode_pgm(image);
}

}  // namespace edgeloc
