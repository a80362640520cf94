#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "edgeloc/compact_map.hpp"
#include "edgeloc/image.hpp"
#include "edgeloc/pose_predictor.hpp"

namespace edgeloc {

class FieldOutOfBounds : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class ImageSizeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kDefaultTruncationPx = 20.0;
inline constexpr int kDefaultBoundaryMarginPx = 2;

/// Edge pixels (non-zero) of one semantic label.
struct SemanticEdgeMask {
  LabelId label = 0;
  ByteImage mask;
  FrameId frame = 0;
};

/// Truncated Euclidean distance transform of one label's edge image and its
/// gradient maps, all in pixels.
struct SemanticEdgeField {
  LabelId label = 0;
  double truncation = kDefaultTruncationPx;
  FieldImage value;
  FieldImage grad_u;
  FieldImage grad_v;

  int width() const { return static_cast<int>(value.cols()); }
  int height() const { return static_cast<int>(value.rows()); }
  bool contains(double u, double v) const { return u >= 0 && v >= 0 && u <= width() - 1 && v <= height() - 1; }
};

struct FieldSample {
  double value = 0.0;
  double grad_u = 0.0;
  double grad_v = 0.0;
};

using SquaredDistanceImage = Image<std::int64_t>;

/// Marks pixels with no edge pixel anywhere in the image.
inline constexpr std::int64_t kNoEdge = std::numeric_limits<std::int64_t>::max();

/// Exact squared Euclidean distance to the nearest non-zero pixel, computed
/// with two passes of the 1-D lower envelope of parabolas in integer
/// arithmetic. Pixels of an empty mask hold kNoEdge.
SquaredDistanceImage squared_distance_transform(const ByteImage& mask);

/// V = min(d_max, distance); an empty mask gives V = d_max everywhere.
/// Gradients are left empty; see compute_gradients.
SemanticEdgeField distance_transform(const ByteImage& mask, double d_max, LabelId label = 0);

/// Central differences in the interior, one-sided at the border.
void compute_gradients(SemanticEdgeField& field);

/// distance_transform followed by compute_gradients.
SemanticEdgeField build_edge_field(const SemanticEdgeMask& mask, double d_max);

/// Bilinear interpolation of V, G_u and G_v. Throws FieldOutOfBounds outside
/// [0, width-1] x [0, height-1].
FieldSample sample_field(const SemanticEdgeField& field, double u, double v);

/// Splits raw edges into per-label masks, removing edges on or within
/// `boundary_margin` pixels (Euclidean) of the dynamic mask. Label image pixel
/// value k in [1, label_count] selects label k-1; 0 is unlabelled.
std::vector<SemanticEdgeMask> build_edge_masks(const ByteImage& label_image, const ByteImage& edges,
                                               const ByteImage& dynamic, std::size_t label_count,
                                               int boundary_margin = kDefaultBoundaryMarginPx,
                                               FrameId frame = 0);

/// Reference detector for the synthetic harness: Sobel magnitude, non-maximum
/// suppression along the quantized gradient direction, then a threshold.
ByteImage detect_edges(const FieldImage& intensity, double threshold);

}  // namespace edgeloc
