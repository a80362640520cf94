#include "edgeloc/edge_features.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace edgeloc {

namespace {

// Lower envelope of parabolas y = (x - site)^2 + f(site) over the finite sites
// of `f`, evaluated at every integer x. Intersections are kept as exact
// rationals num / den with den > 0.
void envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                 std::vector<std::int64_t>& sites, std::vector<std::int64_t>& znum,
                 std::vector<std::int64_t>& zden) {
  const auto n = static_cast<std::int64_t>(f.size());
  sites.clear();
  znum.clear();
  zden.clear();
  for (std::int64_t q = 0; q < n; ++q) {
    if (f[q] == kNoEdge) continue;
    const std::int64_t fq = f[q] + q * q;
    while (!sites.empty()) {
      const std::int64_t v = sites.back();
      const std::int64_t num = fq - (f[v] + v * v);
      const std::int64_t den = 2 * (q - v);
      // Pop v when the new parabola overtakes it before v overtook its predecessor.
      if (sites.size() > 1 && num * zden.back() <= znum.back() * den) {
        sites.pop_back();
        znum.pop_back();
        zden.pop_back();
        continue;
      }
      znum.push_back(num);
      zden.push_back(den);
      break;
    }
    if (sites.empty()) {
      znum.push_back(0);
      zden.push_back(1);
    }
    sites.push_back(q);
  }
  if (sites.empty()) {
    std::fill(out.begin(), out.end(), kNoEdge);
    return;
  }
  // znum/zden[i] is where sites[i] starts to dominate (unused for i = 0).
  std::size_t k = 0;
  for (std::int64_t q = 0; q < n; ++q) {
    while (k + 1 < sites.size() && znum[k + 1] < q * zden[k + 1]) ++k;
    const std::int64_t d = q - sites[k];
    out[q] = d * d + f[sites[k]];
  }
}

}  // namespace

SquaredDistanceImage squared_distance_transform(const ByteImage& mask) {
  const auto h = mask.rows();
  const auto w = mask.cols();
  SquaredDistanceImage d2(h, w);
  std::vector<std::int64_t> f, out, sites, znum, zden;

  f.resize(h);
  out.resize(h);
  for (Eigen::Index u = 0; u < w; ++u) {
    for (Eigen::Index v = 0; v < h; ++v) f[v] = mask(v, u) != 0 ? 0 : kNoEdge;
    envelope_1d(f, out, sites, znum, zden);
    for (Eigen::Index v = 0; v < h; ++v) d2(v, u) = out[v];
  }

  f.resize(w);
  out.resize(w);
  for (Eigen::Index v = 0; v < h; ++v) {
    for (Eigen::Index u = 0; u < w; ++u) f[u] = d2(v, u);
    envelope_1d(f, out, sites, znum, zden);
    for (Eigen::Index u = 0; u < w; ++u) d2(v, u) = out[u];
  }
  return d2;
}

SemanticEdgeField distance_transform(const ByteImage& mask, double d_max, LabelId label) {
  SemanticEdgeField field;
  field.label = label;
  field.truncation = d_max;
  const SquaredDistanceImage d2 = squared_distance_transform(mask);
  field.value.resize(mask.rows(), mask.cols());
  for (Eigen::Index i = 0; i < d2.size(); ++i) {
    const std::int64_t s = d2.data()[i];
    field.value.data()[i] = s == kNoEdge ? d_max : std::min(d_max, std::sqrt(static_cast<double>(s)));
  }
  return field;
}

void compute_gradients(SemanticEdgeField& field) {
  const FieldImage& V = field.value;
  const auto h = V.rows();
  const auto w = V.cols();
  field.grad_u.setZero(h, w);
  field.grad_v.setZero(h, w);
  if (w > 1) {
    for (Eigen::Index v = 0; v < h; ++v) {
      field.grad_u(v, 0) = V(v, 1) - V(v, 0);
      field.grad_u(v, w - 1) = V(v, w - 1) - V(v, w - 2);
      for (Eigen::Index u = 1; u + 1 < w; ++u) field.grad_u(v, u) = 0.5 * (V(v, u + 1) - V(v, u - 1));
    }
  }
  if (h > 1) {
    for (Eigen::Index u = 0; u < w; ++u) {
      field.grad_v(0, u) = V(1, u) - V(0, u);
      field.grad_v(h - 1, u) = V(h - 1, u) - V(h - 2, u);
    }
    for (Eigen::Index v = 1; v + 1 < h; ++v) field.grad_v.row(v) = 0.5 * (V.row(v + 1) - V.row(v - 1));
  }
}

SemanticEdgeField build_edge_field(const SemanticEdgeMask& mask, double d_max) {
  SemanticEdgeField field = distance_transform(mask.mask, d_max, mask.label);
  compute_gradients(field);
  return field;
}

FieldSample sample_field(const SemanticEdgeField& field, double u, double v) {
  if (!field.contains(u, v)) {
    throw FieldOutOfBounds("sample_field: (" + std::to_string(u) + ", " + std::to_string(v) + ") outside field");
  }
  const int w = field.width();
  const int h = field.height();
  const int x0 = w > 1 ? std::min(static_cast<int>(std::floor(u)), w - 2) : 0;
  const int y0 = h > 1 ? std::min(static_cast<int>(std::floor(v)), h - 2) : 0;
  const int x1 = w > 1 ? x0 + 1 : 0;
  const int y1 = h > 1 ? y0 + 1 : 0;
  const double a = u - x0;
  const double b = v - y0;
  const auto lerp = [&](const FieldImage& img) {
    return (1 - b) * ((1 - a) * img(y0, x0) + a * img(y0, x1)) + b * ((1 - a) * img(y1, x0) + a * img(y1, x1));
  };
  FieldSample s;
  s.value = lerp(field.value);
  if (field.grad_u.size() == field.value.size()) {
    s.grad_u = lerp(field.grad_u);
    s.grad_v = lerp(field.grad_v);
  }
  return s;
}

std::vector<SemanticEdgeMask> build_edge_masks(const ByteImage& label_image, const ByteImage& edges,
                                               const ByteImage& dynamic, std::size_t label_count,
                                               int boundary_margin, FrameId frame) {
  if (label_image.rows() != edges.rows() || label_image.cols() != edges.cols() ||
      dynamic.rows() != edges.rows() || dynamic.cols() != edges.cols()) {
    throw ImageSizeMismatch("build_edge_masks: label, edge and dynamic images differ in size");
  }
  const SquaredDistanceImage to_dynamic = squared_distance_transform(dynamic);
  const std::int64_t margin2 = static_cast<std::int64_t>(boundary_margin) * boundary_margin;

  std::vector<SemanticEdgeMask> masks(label_count);
  for (std::size_t l = 0; l < label_count; ++l) {
    masks[l].label = l;
    masks[l].frame = frame;
    masks[l].mask.setZero(edges.rows(), edges.cols());
  }
  for (Eigen::Index i = 0; i < edges.size(); ++i) {
    if (edges.data()[i] == 0) continue;
    const std::uint8_t value = label_image.data()[i];
    if (value == 0 || value > label_count) continue;
    const std::int64_t d2 = to_dynamic.data()[i];
    if (d2 != kNoEdge && d2 <= margin2) continue;
    masks[value - 1].mask.data()[i] = 1;
  }
  return masks;
}

ByteImage detect_edges(const FieldImage& intensity, double threshold) {
  const auto h = intensity.rows();
  const auto w = intensity.cols();
  FieldImage gx = FieldImage::Zero(h, w);
  FieldImage gy = FieldImage::Zero(h, w);
  for (Eigen::Index v = 1; v + 1 < h; ++v) {
    for (Eigen::Index u = 1; u + 1 < w; ++u) {
      const auto& I = intensity;
      gx(v, u) = (I(v - 1, u + 1) + 2 * I(v, u + 1) + I(v + 1, u + 1)) -
                 (I(v - 1, u - 1) + 2 * I(v, u - 1) + I(v + 1, u - 1));
      gy(v, u) = (I(v + 1, u - 1) + 2 * I(v + 1, u) + I(v + 1, u + 1)) -
                 (I(v - 1, u - 1) + 2 * I(v - 1, u) + I(v - 1, u + 1));
    }
  }
  const FieldImage mag = (gx.array().square() + gy.array().square()).sqrt().matrix();
  ByteImage out = ByteImage::Zero(h, w);
  for (Eigen::Index v = 1; v + 1 < h; ++v) {
    for (Eigen::Index u = 1; u + 1 < w; ++u) {
      const double m = mag(v, u);
      if (m < threshold) continue;
      double angle = std::atan2(gy(v, u), gx(v, u)) * 180.0 / std::numbers::pi;
      if (angle < 0) angle += 180.0;
      int du = 1, dv = 0;
      if (angle >= 22.5 && angle < 67.5) {
        du = 1;
        dv = 1;
      } else if (angle >= 67.5 && angle < 112.5) {
        du = 0;
        dv = 1;
      } else if (angle >= 112.5 && angle < 157.5) {
        du = -1;
        dv = 1;
      }
      // Ties keep the first pixel along the gradient so plateaus stay one pixel wide.
      if (m > mag(v + dv, u + du) && m >= mag(v - dv, u - du)) out(v, u) = 1;
    }
  }
  return out;
}

}  // namespace edgeloc
