#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

namespace edgeloc {

/// Row-major raster indexed (v, u): rows are image rows.
template <typename T>
using Image = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using ByteImage = Image<std::uint8_t>;
using FieldImage = Image<double>;

/// Binary "P5" PGM with maxval 255.
ByteImage read_pgm(const std::string& path);
void write_pgm(const ByteImage& image, const std::string& path);

ByteImage decode_pgm(const std::string& bytes);
std::string encode_pgm(const ByteImage& image);

}  // namespace edgeloc
