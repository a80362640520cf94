#include "edgeloc/landmark_selection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace edgeloc {

std::size_t LandmarkSamples::size() const {
  std::size_t n = 0;
  for (const auto& v : by_label) n += v.size();
  return n;
}

std::size_t LandmarkSamples::distinct_landmarks() const {
  std::set<LandmarkId> ids;
  for (const auto& v : by_label) {
    for (const auto& s : v) ids.insert(s.landmark);
  }
  return ids.size();
}

DepthBuffer::DepthBuffer(int width, int height)
    : depth_(FieldImage::Constant(height, width, std::numeric_limits<double>::infinity())),
      owner_(Image<std::int32_t>::Constant(height, width, kNoOwner)) {}

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

std::vector<Eigen::Vector3d> clip_near(std::span<const Eigen::Vector3d> poly, double near) {
  std::vector<Eigen::Vector3d> out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d& cur = poly[i];
    const Eigen::Vector3d& nxt = poly[(i + 1) % n];
    const bool cur_in = cur.z() >= near;
    const bool nxt_in = nxt.z() >= near;
    if (cur_in) out.push_back(cur);
    if (cur_in != nxt_in) {
      const double t = (near - cur.z()) / (nxt.z() - cur.z());
      out.push_back(cur + t * (nxt - cur));
    }
  }
  return out;
}

// Newell normal; robust for slightly non-planar or near-degenerate polygons.
Eigen::Vector3d polygon_normal(std::span<const Eigen::Vector3d> poly) {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector3d& a = poly[i];
    const Eigen::Vector3d& b = poly[(i + 1) % poly.size()];
    n += a.cross(b);
  }
  return n;
}

}  // namespace

void DepthBuffer::fill_polygon(std::span<const Eigen::Vector3d> polygon, std::int32_t owner,
                               const CameraIntrinsics& k, double near) {
  if (polygon.size() < 3) return;
  const Eigen::Vector3d normal = polygon_normal(polygon);
  if (normal.norm() < 1e-12) return;
  const double plane_d = normal.dot(polygon[0]);
  const auto clipped = clip_near(polygon, near);
  if (clipped.size() < 3) return;

  std::vector<Eigen::Vector2d> px(clipped.size());
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    px[i] = Eigen::Vector2d(k.fx * clipped[i].x() / clipped[i].z() + k.cx,
                            k.fy * clipped[i].y() / clipped[i].z() + k.cy);
  }

  const int w = width();
  const int h = height();
  for (std::size_t i = 1; i + 1 < px.size(); ++i) {
    const Eigen::Vector2d& p0 = px[0];
    const Eigen::Vector2d& p1 = px[i];
    const Eigen::Vector2d& p2 = px[i + 1];
    const double area = cross2(p1 - p0, p2 - p0);
    if (std::abs(area) < 1e-12) continue;
    const double sign = area > 0 ? 1.0 : -1.0;
    const double umin = std::min({p0.x(), p1.x(), p2.x()});
    const double umax = std::max({p0.x(), p1.x(), p2.x()});
    const double vmin = std::min({p0.y(), p1.y(), p2.y()});
    const double vmax = std::max({p0.y(), p1.y(), p2.y()});
    const int u0 = std::max(0, static_cast<int>(std::ceil(std::max(umin, -1.0))));
    const int u1 = std::min(w - 1, static_cast<int>(std::floor(std::min(umax, static_cast<double>(w)))));
    const int v0 = std::max(0, static_cast<int>(std::ceil(std::max(vmin, -1.0))));
    const int v1 = std::min(h - 1, static_cast<int>(std::floor(std::min(vmax, static_cast<double>(h)))));
    for (int v = v0; v <= v1; ++v) {
      for (int u = u0; u <= u1; ++u) {
        const Eigen::Vector2d q(u, v);
        if (sign * cross2(p2 - p1, q - p1) < 0) continue;
        if (sign * cross2(p0 - p2, q - p2) < 0) continue;
        if (sign * cross2(p1 - p0, q - p0) < 0) continue;
        const Eigen::Vector3d ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        const double denom = normal.dot(ray);
        if (std::abs(denom) < 1e-15) continue;
        const double z = plane_d / denom;
        if (!(z > 0.0) || !std::isfinite(z)) continue;
        if (z < depth_(v, u)) {
          depth_(v, u) = z;
          owner_(v, u) = owner;
        }
      }
    }
  }
}

bool DepthBuffer::occludes(const Eigen::Vector3d& point, std::int32_t owner, const CameraIntrinsics& k,
                           double tolerance) const {
  Eigen::Vector2d uv;
  if (!try_project(point, k, uv)) return false;
  const long u = std::lround(uv.x());
  const long v = std::lround(uv.y());
  if (u < 0 || v < 0 || u >= width() || v >= height()) return false;
  if (owner_(v, u) == owner) return false;
  return point.z() > depth_(v, u) + tolerance;
}

std::size_t DepthBuffer::filled_pixels() const {
  return static_cast<std::size_t>((depth_.array() < std::numeric_limits<double>::infinity()).count());
}

namespace {

double pole_radius(const LineSegmentLandmark& seg, const SelectionConfig& cfg) {
  return seg.pole_radius.value_or(cfg.default_pole_radius_m);
}

bool is_pole(const CompactMap& map, const LineSegmentLandmark& seg) {
  return map.label(seg.label).pole || seg.pole_radius.has_value();
}

// Offset direction of a pole's silhouette lines; zero if viewed end-on.
Eigen::Vector3d silhouette_offset(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d axis = b - a;
  const Eigen::Vector3d mid = 0.5 * (a + b);
  Eigen::Vector3d n = axis.cross(mid);
  const double len = n.norm();
  if (len < 1e-9 * std::max(1.0, axis.norm() * mid.norm())) return Eigen::Vector3d::Zero();
  return n / len;
}

}  // namespace

std::optional<std::vector<Eigen::Vector3d>> occluder_polygon(const CompactMap& map, LandmarkId id,
                                                            const Pose& camera_from_world,
                                                            const SelectionConfig& cfg) {
  const Landmark& lm = map.landmarks().at(id);
  if (const auto* seg = std::get_if<LineSegmentLandmark>(&lm)) {
    if (!is_pole(map, *seg)) return std::nullopt;
    const Eigen::Vector3d a = camera_from_world * seg->p0;
    const Eigen::Vector3d b = camera_from_world * seg->p1;
    const Eigen::Vector3d n = silhouette_offset(a, b) * pole_radius(*seg, cfg);
    if (n.isZero()) return std::nullopt;
    return std::vector<Eigen::Vector3d>{a + n, b + n, b - n, a - n};
  }
  const auto& wf = std::get<WireframeLandmark>(lm);
  if (map.label(wf.label).category == LabelCategory::Road) return std::nullopt;
  std::vector<Eigen::Vector3d> poly;
  poly.reserve(wf.points.size());
  for (const auto& p : wf.points) poly.push_back(camera_from_world * p);
  return poly;
}

std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> landmark_edges(const CompactMap& map, LandmarkId id,
                                                                        const Pose& camera_from_world,
                                                                        const SelectionConfig& cfg) {
  std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> edges;
  const Landmark& lm = map.landmarks().at(id);
  if (const auto* seg = std::get_if<LineSegmentLandmark>(&lm)) {
    const Eigen::Vector3d a = camera_from_world * seg->p0;
    const Eigen::Vector3d b = camera_from_world * seg->p1;
    if (is_pole(map, *seg)) {
      const Eigen::Vector3d n = silhouette_offset(a, b) * pole_radius(*seg, cfg);
      if (!n.isZero()) {
        edges.emplace_back(a + n, b + n);
        edges.emplace_back(a - n, b - n);
        return edges;
      }
    }
    edges.emplace_back(a, b);
    return edges;
  }
  const auto& wf = std::get<WireframeLandmark>(lm);
  const std::size_t n = wf.points.size();
  for (std::size_t i = 0; i < n; ++i) {
    edges.emplace_back(camera_from_world * wf.points[i], camera_from_world * wf.points[(i + 1) % n]);
  }
  return edges;
}

std::optional<std::pair<Eigen::Vector3d, Eigen::Vector3d>> clip_to_frustum(const Eigen::Vector3d& a,
                                                                           const Eigen::Vector3d& b,
                                                                           const CameraIntrinsics& k,
                                                                           double near, double far) {
  // Half-spaces n.p + d >= 0 bounding the image pyramid.
  const double umax = k.width - 1;
  const double vmax = k.height - 1;
  const std::array<std::pair<Eigen::Vector3d, double>, 6> planes = {{
      {Eigen::Vector3d(0, 0, 1), -near},
      {Eigen::Vector3d(0, 0, -1), far},
      {Eigen::Vector3d(k.fx, 0, k.cx), 0.0},
      {Eigen::Vector3d(-k.fx, 0, umax - k.cx), 0.0},
      {Eigen::Vector3d(0, k.fy, k.cy), 0.0},
      {Eigen::Vector3d(0, -k.fy, vmax - k.cy), 0.0},
  }};
  double t0 = 0.0;
  double t1 = 1.0;
  for (const auto& [n, d] : planes) {
    const double fa = n.dot(a) + d;
    const double fb = n.dot(b) + d;
    if (fa < 0 && fb < 0) return std::nullopt;
    if (fa < 0) t0 = std::max(t0, fa / (fa - fb));
    if (fb < 0) t1 = std::min(t1, fa / (fa - fb));
    if (t0 > t1) return std::nullopt;
  }
  const Eigen::Vector3d d = b - a;
  return std::make_pair(Eigen::Vector3d(a + t0 * d), Eigen::Vector3d(a + t1 * d));
}

std::vector<Eigen::Vector3d> sample_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                            const CameraIntrinsics& k, double spacing_px, double near,
                                            double far) {
  std::vector<Eigen::Vector3d> out;
  const auto clipped = clip_to_frustum(a, b, k, near, far);
  if (!clipped) return out;
  const auto& [ca, cb] = *clipped;
  Eigen::Vector2d ua, ub;
  if (!try_project(ca, k, ua) || !try_project(cb, k, ub)) return out;
  const double length = (ub - ua).norm();
  const std::size_t n = static_cast<std::size_t>(std::ceil(length / spacing_px)) + 1;
  out.reserve(n);
  const Eigen::Vector3d d = cb - ca;
  for (std::size_t i = 0; i < n; ++i) {
    // Image-space fraction s maps to t along the 3D segment via 1/Z interpolation.
    const double s = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    const double t = s * ca.z() / ((1.0 - s) * cb.z() + s * ca.z());
    const Eigen::Vector3d p = ca + t * d;
    Eigen::Vector2d uv;
    if (try_project(p, k, uv) && k.contains(uv.x(), uv.y())) out.push_back(p);
  }
  return out;
}

std::vector<Eigen::Vector3d> sample_landmark_edges(const CompactMap& map, LandmarkId id, const Pose& prior,
                                                   const CameraIntrinsics& k, const SelectionConfig& cfg) {
  std::vector<Eigen::Vector3d> out;
  const Pose camera_from_world = inverse(prior);
  for (const auto& [a, b] : landmark_edges(map, id, camera_from_world, cfg)) {
    const auto pts = sample_segment(a, b, k, cfg.sample_spacing_px, cfg.near_plane_m, cfg.max_selection_range_m);
    out.insert(out.end(), pts.begin(), pts.end());
  }
  return out;
}

std::vector<LandmarkId> frustum_cull(const CompactMap& map, const Pose& prior, const CameraIntrinsics& k,
                                     const SelectionConfig& cfg) {
  std::vector<LandmarkId> ids;
  const Pose camera_from_world = inverse(prior);
  for (LandmarkId id = 0; id < map.size(); ++id) {
    for (const auto& [a, b] : landmark_edges(map, id, camera_from_world, cfg)) {
      if (clip_to_frustum(a, b, k, cfg.near_plane_m, cfg.max_selection_range_m)) {
        ids.push_back(id);
        break;
      }
    }
  }
  return ids;
}

DepthBuffer rasterize_occluders(const CompactMap& map, std::span<const LandmarkId> ids, const Pose& prior,
                                const CameraIntrinsics& k, const SelectionConfig& cfg) {
  DepthBuffer buffer(k.width, k.height);
  const Pose camera_from_world = inverse(prior);
  for (const LandmarkId id : ids) {
    const auto poly = occluder_polygon(map, id, camera_from_world, cfg);
    if (!poly) continue;
    buffer.fill_polygon(*poly, static_cast<std::int32_t>(id), k, cfg.near_plane_m);
  }
  return buffer;
}

LandmarkSamples select_landmarks(const CompactMap& map, const Pose& prior, const CameraIntrinsics& k,
                                 const SelectionConfig& cfg) {
  LandmarkSamples result;
  result.by_label.resize(map.labels().size());
  const Pose camera_from_world = inverse(prior);

  const std::vector<LandmarkId> visible = frustum_cull(map, prior, k, cfg);

  // An occluder can hide landmarks even when none of its own edges is in view,
  // so every occluder with a vertex inside the depth range is rasterized.
  std::vector<LandmarkId> occluders;
  for (LandmarkId id = 0; id < map.size(); ++id) {
    const auto poly = occluder_polygon(map, id, camera_from_world, cfg);
    if (!poly) continue;
    const bool in_range = std::any_of(poly->begin(), poly->end(), [&](const Eigen::Vector3d& p) {
      return p.z() > cfg.near_plane_m && p.z() < cfg.max_selection_range_m;
    });
    if (in_range) occluders.push_back(id);
  }
  const DepthBuffer buffer = rasterize_occluders(map, occluders, prior, k, cfg);

  for (const LandmarkId id : visible) {
    const LabelId label = landmark_label(map.landmarks()[id]);
    for (const auto& [a, b] : landmark_edges(map, id, camera_from_world, cfg)) {
      const Eigen::Vector3d tangent = (b - a).normalized();
      for (const auto& p :
           sample_segment(a, b, k, cfg.sample_spacing_px, cfg.near_plane_m, cfg.max_selection_range_m)) {
        if (buffer.occludes(p, static_cast<std::int32_t>(id), k, cfg.depth_tolerance_m)) continue;
        result.by_label[label].push_back(LandmarkSample{p, tangent, id, label});
      }
    }
  }
  return result;
}

}  // namespace edgeloc
