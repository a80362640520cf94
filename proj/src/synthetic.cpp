#include "edgeloc/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <limits>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "edgeloc/image.hpp"
#include "edgeloc/landmark_selection.hpp"
#include "edgeloc/random.hpp"

namespace edgeloc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;

// Stream ids keep the draws of unrelated consumers independent.
enum Stream : std::uint64_t {
  kLayoutStream = 1,
  kTrajectoryStream = 2,
  kOdometryStream = 3,
  kRenderStream = 0x1000,
};

constexpr double kLaneOffsets[] = {-5.25, -1.75, 1.75, 5.25};
constexpr double kCameraHeight = 1.5;
constexpr double kStartS = 5.0;
constexpr double kCornerRadius = 30.0;

double quantize(double v) { return std::round(v * 1000.0) / 1000.0; }

Eigen::Vector3d quantize(const Eigen::Vector3d& p) { return {quantize(p.x()), quantize(p.y()), quantize(p.z())}; }

// Centreline parameterized by arc length. The corner variant runs north, turns
// right on a circular arc and continues east.
class RoadPath {
 public:
  RoadPath(bool corner, double length) : corner_(corner), l1_(0.45 * length) {}

  Eigen::Vector2d centre(double s) const {
    if (!corner_ || s <= l1_) return {0.0, s};
    const double arc = kCornerRadius * kPi / 2.0;
    if (s <= l1_ + arc) {
      const double phi = (s - l1_) / kCornerRadius;
      return {kCornerRadius * (1.0 - std::cos(phi)), l1_ + kCornerRadius * std::sin(phi)};
    }
    return {kCornerRadius + (s - l1_ - arc), l1_ + kCornerRadius};
  }

  Eigen::Vector2d direction(double s) const {
    if (!corner_ || s <= l1_) return {0.0, 1.0};
    const double arc = kCornerRadius * kPi / 2.0;
    if (s <= l1_ + arc) {
      const double phi = (s - l1_) / kCornerRadius;
      return {std::sin(phi), std::cos(phi)};
    }
    return {1.0, 0.0};
  }

  Eigen::Vector2d right(double s) const {
    const Eigen::Vector2d d = direction(s);
    return {d.y(), -d.x()};
  }

  Eigen::Vector3d world(double s, double lateral, double height) const {
    const Eigen::Vector2d p = centre(s) + lateral * right(s);
    return {p.x(), p.y(), height};
  }

 private:
  bool corner_;
  double l1_;
};

struct LabelIds {
  LabelId lane_line, lamp_pole, building_edge, rectangle_mark, traffic_sign;
};

LabelIds add_labels(CompactMap& map) {
  LabelIds ids{};
  ids.lane_line = map.add_label({"lane_line", LabelCategory::Road, false});
  ids.lamp_pole = map.add_label({"lamp_pole", LabelCategory::NonRoad, true});
  ids.building_edge = map.add_label({"building_edge", LabelCategory::NonRoad, false});
  ids.rectangle_mark = map.add_label({"rectangle_mark", LabelCategory::Road, false});
  ids.traffic_sign = map.add_label({"traffic_sign", LabelCategory::NonRoad, false});
  return ids;
}

// Position of element i of n spread over [lo, hi] with a little jitter.
double spread(std::size_t i, std::size_t n, double lo, double hi, double jitter, CounterRng& rng) {
  const double step = (hi - lo) / static_cast<double>(n);
  return lo + (static_cast<double>(i) + 0.5) * step + rng.uniform(-jitter, jitter) * step;
}

CompactMap build_map(const RoadPath& road, double length, const LandmarkCounts& counts, CounterRng& rng) {
  CompactMap map;
  const LabelIds ids = add_labels(map);
  const double lo = 2.0;
  const double hi = length - 2.0;

  // Dashed lane lines, split over the four lines.
  for (std::size_t line = 0; line < 4; ++line) {
    const std::size_t n = counts.lane_line / 4 + (line < counts.lane_line % 4 ? 1 : 0);
    if (n == 0) continue;
    const double step = (hi - lo) / static_cast<double>(n);
    const double dash = std::min(3.0, 0.55 * step);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = lo + static_cast<double>(i) * step + rng.uniform(0.0, step - dash);
      map.add(LineSegmentLandmark{ids.lane_line, quantize(road.world(s, kLaneOffsets[line], 0.0)),
                                  quantize(road.world(s + dash, kLaneOffsets[line], 0.0)), std::nullopt});
    }
  }

  for (std::size_t i = 0; i < counts.lamp_pole; ++i) {
    const double s = spread(i, counts.lamp_pole, lo, hi, 0.2, rng);
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    const double l = side * rng.uniform(6.8, 7.4);
    // Odd poles carry an explicit radius, even ones use the default.
    std::optional<double> radius;
    if (i % 2 == 1) radius = quantize(rng.uniform(0.12, 0.2));
    map.add(LineSegmentLandmark{ids.lamp_pole, quantize(road.world(s, l, 0.0)), quantize(road.world(s, l, 8.0)),
                                radius});
  }

  for (std::size_t i = 0; i < counts.building_edge; ++i) {
    const double s = spread(i, counts.building_edge, lo, hi, 0.3, rng);
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    const double l = side * rng.uniform(12.0, 16.0);
    const double h = rng.uniform(10.0, 20.0);
    if (rng.uniform() < 0.6) {
      map.add(LineSegmentLandmark{ids.building_edge, quantize(road.world(s, l, 0.0)), quantize(road.world(s, l, h)),
                                  std::nullopt});
    } else {
      const double len = rng.uniform(8.0, 15.0);
      map.add(LineSegmentLandmark{ids.building_edge, quantize(road.world(s, l, h)),
                                  quantize(road.world(s + len, l, h)), std::nullopt});
    }
  }

  for (std::size_t i = 0; i < counts.rectangle_mark; ++i) {
    const double s = spread(i, counts.rectangle_mark, lo + 2.0, hi - 2.0, 0.3, rng);
    const double l = 3.5 * static_cast<double>(static_cast<int>(rng.uniform() * 3.0) - 1);
    // Wide boxes and long arrows; both are at least 1 m along the road so the
    // front and back edges stay well apart.
    const bool wide = rng.uniform() < 0.4;
    const double along = wide ? rng.uniform(1.0, 1.5) : rng.uniform(1.5, 3.0);
    const double across = wide ? rng.uniform(2.0, 2.8) : rng.uniform(0.4, 0.8);
    const Eigen::Vector2d c = road.centre(s) + l * road.right(s);
    const Eigen::Vector2d d = road.direction(s);
    const Eigen::Vector2d r = road.right(s);
    WireframeLandmark wf{ids.rectangle_mark, {}};
    for (const auto& [a, b] : {std::pair{-1.0, -1.0}, {1.0, -1.0}, {1.0, 1.0}, {-1.0, 1.0}}) {
      const Eigen::Vector2d p = c + a * 0.5 * along * d + b * 0.5 * across * r;
      wf.points.push_back(quantize(Eigen::Vector3d(p.x(), p.y(), 0.0)));
    }
    map.add(std::move(wf));
  }

  for (std::size_t i = 0; i < counts.traffic_sign; ++i) {
    const double s = spread(i, counts.traffic_sign, lo + 5.0, hi, 0.2, rng);
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    const double l = side * rng.uniform(4.5, 6.0);
    const double bottom = rng.uniform(4.5, 5.5);
    const double w = rng.uniform(1.2, 1.8);
    const double h = rng.uniform(0.8, 1.2);
    WireframeLandmark wf{ids.traffic_sign, {}};
    wf.points = {quantize(road.world(s, l - w / 2, bottom)), quantize(road.world(s, l + w / 2, bottom)),
                 quantize(road.world(s, l + w / 2, bottom + h)), quantize(road.world(s, l - w / 2, bottom + h))};
    map.add(std::move(wf));
  }
  return map;
}

Matrix3<double> rot_x(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitX()).toRotationMatrix(); }
Matrix3<double> rot_y(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitY()).toRotationMatrix(); }
Matrix3<double> rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }

Trajectory build_trajectory(const RoadPath& road, std::size_t frames, double speed, CounterRng& rng) {
  const double sway_phase = rng.uniform(0.0, 2.0 * kPi);
  const double sway_period = rng.uniform(40.0, 80.0);
  const double wobble_phase = rng.uniform(0.0, 2.0 * kPi);
  Trajectory traj;
  traj.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double s = kStartS + speed * static_cast<double>(k);
    const double lateral = 0.3 * std::sin(2.0 * kPi * s / sway_period + sway_phase);
    const double height = kCameraHeight + 0.02 * std::sin(0.9 * s + wobble_phase);
    const Eigen::Vector2d d2 = road.direction(s);
    const Eigen::Vector3d forward(d2.x(), d2.y(), 0.0);
    const Eigen::Vector3d right(d2.y(), -d2.x(), 0.0);
    Matrix3<double> base;
    base.col(0) = right;
    base.col(1) = -Eigen::Vector3d::UnitZ();
    base.col(2) = forward;
    const double pitch = -2.0 * kDeg + 0.3 * kDeg * std::sin(0.7 * s + wobble_phase);
    const double yaw = 0.5 * kDeg * std::sin(2.0 * kPi * s / sway_period + sway_phase + 1.0);
    const double roll = 0.2 * kDeg * std::sin(1.3 * s);
    Pose pose;
    pose.rotation = base * rot_x(pitch) * rot_y(yaw) * rot_z(roll);
    pose.translation = road.world(s, lateral, height);
    traj.push_back({static_cast<FrameId>(k), pose});
  }
  return traj;
}

// The camera sees past the selector's range limit.
SelectionConfig render_selection() {
  SelectionConfig cfg;
  cfg.sample_spacing_px = 0.25;
  cfg.max_selection_range_m = 1e4;
  return cfg;
}

std::vector<std::array<Eigen::Vector3d, 4>> box_faces(const Eigen::Vector3d& lo, const Eigen::Vector3d& hi) {
  const auto c = [&](int i) {
    return Eigen::Vector3d((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(), (i & 4) ? hi.z() : lo.z());
  };
  return {{c(0), c(1), c(3), c(2)}, {c(4), c(5), c(7), c(6)}, {c(0), c(1), c(5), c(4)},
          {c(2), c(3), c(7), c(6)}, {c(0), c(2), c(6), c(4)}, {c(1), c(3), c(7), c(5)}};
}

}  // namespace

std::string_view to_string(ScenePreset preset) {
  switch (preset) {
    case ScenePreset::UrbanStraight: return "urban-straight";
    case ScenePreset::UrbanCorner: return "urban-corner";
    case ScenePreset::Sparse: return "sparse";
  }
  return "unknown";
}

ScenePreset parse_preset(std::string_view name) {
  if (name == "urban-straight") return ScenePreset::UrbanStraight;
  if (name == "urban-corner") return ScenePreset::UrbanCorner;
  if (name == "sparse") return ScenePreset::Sparse;
  throw std::invalid_argument("unknown scene preset: " + std::string(name));
}

LandmarkCounts preset_counts(ScenePreset preset) {
  switch (preset) {
    case ScenePreset::UrbanStraight: return {315, 5, 13, 81, 5};
    case ScenePreset::UrbanCorner: return {85, 3, 7, 46, 3};
    case ScenePreset::Sparse: return {40, 5, 0, 26, 3};
  }
  return {};
}

double preset_road_length(ScenePreset preset) {
  switch (preset) {
    case ScenePreset::UrbanStraight: return 303.0;
    case ScenePreset::UrbanCorner: return 171.0;
    case ScenePreset::Sparse: return 146.0;
  }
  return 0.0;
}

const Pose& SyntheticScene::pose(FrameId frame) const {
  for (const auto& e : ground_truth) {
    if (e.frame == frame) return e.pose;
  }
  throw std::out_of_range("frame not in scene: " + std::to_string(frame));
}

CameraIntrinsics default_intrinsics() {
  CameraIntrinsics k;
  k.fx = 420.0;
  k.fy = 420.0;
  k.cx = 319.5;
  k.cy = 199.5;
  k.width = 640;
  k.height = 400;
  return k;
}

SyntheticScene generate_scene(const SceneOptions& options) {
  const double length = preset_road_length(options.preset);
  const std::size_t frames =
      options.frames > 0 ? options.frames : (options.preset == ScenePreset::UrbanStraight ? 300 : 200);
  if (kStartS + options.speed_m_per_frame * static_cast<double>(frames) > length - 2.0) {
    throw std::invalid_argument("trajectory longer than the preset road");
  }
  const RoadPath road(options.preset == ScenePreset::UrbanCorner, length);

  SyntheticScene scene;
  scene.preset = options.preset;
  scene.seed = options.seed;
  scene.intrinsics = default_intrinsics();
  scene.noise = options.noise;
  scene.counts = preset_counts(options.preset);
  scene.road_length_m = length;

  constexpr int kAttempts = 16;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    CounterRng layout(options.seed, kLayoutStream + 16 * static_cast<std::uint64_t>(attempt));
    CounterRng motion(options.seed, kTrajectoryStream + 16 * static_cast<std::uint64_t>(attempt));
    scene.map = build_map(road, length, scene.counts, layout);
    scene.ground_truth = build_trajectory(road, frames, options.speed_m_per_frame, motion);
    const SelectionConfig cfg;
    const bool ok = std::all_of(scene.ground_truth.begin(), scene.ground_truth.end(), [&](const TrajectoryEntry& e) {
      return frustum_cull(scene.map, e.pose, scene.intrinsics, cfg).size() >= options.min_visible_landmarks;
    });
    if (ok) return scene;
  }
  throw std::runtime_error("no scene layout satisfies the visibility constraint");
}

OccluderBox view_blocker(const CameraIntrinsics& k, FrameId first, FrameId last, double coverage) {
  constexpr double kNear = 2.0;
  const double half_u = coverage * 0.5 * k.width / k.fx * kNear;
  const double half_v = coverage * 0.5 * k.height / k.fy * kNear;
  const double cu = ((k.width - 1) * 0.5 - k.cx) / k.fx * kNear;
  const double cv = ((k.height - 1) * 0.5 - k.cy) / k.fy * kNear;
  OccluderBox box;
  box.min = Eigen::Vector3d(cu - half_u, cv - half_v, kNear);
  box.max = Eigen::Vector3d(cu + half_u, cv + half_v, kNear + 1.0);
  box.camera_attached = true;
  box.first_frame = first;
  box.last_frame = last;
  return box;
}

RenderedFrame render_frame(const SyntheticScene& scene, FrameId frame) {
  const CameraIntrinsics& k = scene.intrinsics;
  const Pose& gt = scene.pose(frame);
  const Pose camera_from_world = inverse(gt);
  const SelectionConfig cfg = render_selection();

  RenderedFrame out;
  out.frame = frame;
  out.labels = ByteImage::Zero(k.height, k.width);
  out.edges = ByteImage::Zero(k.height, k.width);
  out.dynamic = ByteImage::Zero(k.height, k.width);

  // Edges up to half a pixel outside the image still light border pixels, so
  // clip against a frustum one pixel wider on every side.
  CameraIntrinsics margin_k = k;
  margin_k.cx += 1.0;
  margin_k.cy += 1.0;
  margin_k.width += 2;
  margin_k.height += 2;
  const std::vector<LandmarkId> visible = frustum_cull(scene.map, gt, margin_k, cfg);
  const DepthBuffer landmarks = rasterize_occluders(scene.map, visible, gt, k, cfg);

  DepthBuffer boxes(k.width, k.height);
  for (const OccluderBox& box : scene.noise.occluders) {
    if (!box.active(frame)) continue;
    for (auto face : box_faces(box.min, box.max)) {
      if (!box.camera_attached) {
        for (auto& p : face) p = camera_from_world * p;
      }
      boxes.fill_polygon(face, 0, k, cfg.near_plane_m);
    }
  }
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      if (std::isfinite(boxes.depth(u, v))) out.dynamic(v, u) = 255;
    }
  }

  // Nearest edge wins a pixel; the stamp avoids revisiting within one edge.
  FieldImage zbuf = FieldImage::Constant(k.height, k.width, std::numeric_limits<double>::infinity());
  Image<std::int32_t> stamp = Image<std::int32_t>::Constant(k.height, k.width, -1);
  Image<std::int32_t> label_at = Image<std::int32_t>::Constant(k.height, k.width, -1);
  std::int32_t edge_index = 0;
  for (const LandmarkId id : visible) {
    const LabelId label = landmark_label(scene.map.landmarks()[id]);
    for (const auto& [a3, b3] : landmark_edges(scene.map, id, camera_from_world, cfg)) {
      ++edge_index;
      const auto clipped = clip_to_frustum(a3, b3, margin_k, cfg.near_plane_m, cfg.max_selection_range_m);
      if (!clipped) continue;
      const auto& [ca, cb] = *clipped;
      const Eigen::Vector2d a = project(ca, k);
      const Eigen::Vector2d b = project(cb, k);
      const Eigen::Vector2d ab = b - a;
      const double len2 = ab.squaredNorm();
      const int steps = std::max(1, static_cast<int>(std::ceil(std::sqrt(len2) / 0.25)));
      for (int i = 0; i <= steps; ++i) {
        const Eigen::Vector2d q = a + ab * (static_cast<double>(i) / steps);
        const int qu = static_cast<int>(std::lround(q.x()));
        const int qv = static_cast<int>(std::lround(q.y()));
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int u = qu + du;
            const int v = qv + dv;
            if (u < 0 || v < 0 || u >= k.width || v >= k.height || stamp(v, u) == edge_index) continue;
            const Eigen::Vector2d pix(u, v);
            const double s = len2 > 0 ? std::clamp((pix - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
            if ((a + s * ab - pix).squaredNorm() > 0.25) continue;
            stamp(v, u) = edge_index;
            // Perspective-correct point on the 3D edge behind image fraction s.
            const double t = s * ca.z() / ((1.0 - s) * cb.z() + s * ca.z());
            const Eigen::Vector3d p = ca + t * (cb - ca);
            if (landmarks.owner(u, v) != static_cast<std::int32_t>(id) &&
                p.z() > landmarks.depth(u, v) + cfg.depth_tolerance_m) {
              continue;
            }
            if (p.z() > boxes.depth(u, v)) continue;
            if (p.z() < zbuf(v, u)) {
              zbuf(v, u) = p.z();
              label_at(v, u) = static_cast<std::int32_t>(label);
            }
          }
        }
      }
    }
  }

  CounterRng rng(scene.seed, kRenderStream + static_cast<std::uint64_t>(frame));
  const NoiseConfig& noise = scene.noise;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      if (label_at(v, u) < 0) continue;
      // Every pixel consumes the same draws so later pixels do not depend on
      // earlier outcomes.
      const double keep = rng.uniform();
      const double nu = rng.normal();
      const double nv = rng.normal();
      if (keep < noise.edge_dropout) continue;
      const int ju = u + static_cast<int>(std::lround(noise.edge_jitter_px * nu));
      const int jv = v + static_cast<int>(std::lround(noise.edge_jitter_px * nv));
      if (ju < 0 || jv < 0 || ju >= k.width || jv >= k.height) continue;
      const auto label = static_cast<LabelId>(label_at(v, u));
      out.labels(jv, ju) = static_cast<std::uint8_t>(label + 1);
      out.edges(jv, ju) = 255;
      out.pixels.push_back({u, v, ju, jv, label});
    }
  }
  return out;
}

Trajectory corrupt_odometry(const Trajectory& ground_truth, double drift, double yaw_walk, std::uint64_t seed) {
  Trajectory out;
  if (ground_truth.empty()) return out;
  CounterRng rng(seed, kOdometryStream);
  constexpr double kWander = 0.05;  // rad per sqrt(m) for the drift direction
  double azimuth = rng.uniform(0.0, 2.0 * kPi);
  double elevation = rng.uniform(-0.3, 0.3);
  double yaw_error = 0.0;
  Eigen::Vector3d translation_error = Eigen::Vector3d::Zero();

  const Pose gt0_inv = inverse(ground_truth.front().pose);
  // Heading errors turn about gravity, expressed in the odometry frame.
  const Eigen::Vector3d up = gt0_inv.rotation * Eigen::Vector3d::UnitZ();
  for (std::size_t i = 0; i < ground_truth.size(); ++i) {
    if (i > 0) {
      const Pose& prev = ground_truth[i - 1].pose;
      const Pose& cur = ground_truth[i].pose;
      const double d = (cur.translation - prev.translation).norm();
      const double sd = std::sqrt(d);
      azimuth += kWander * sd * rng.normal();
      elevation = std::clamp(elevation + kWander * sd * rng.normal(), -0.5, 0.5);
      yaw_error += yaw_walk * sd * rng.normal();
      const Eigen::Vector3d dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                                std::sin(elevation));
      translation_error += drift * d * dir;
    }
    // Relative to frame 0 of the ground truth, then perturbed.
    Pose rel = compose(gt0_inv, ground_truth[i].pose);
    rel.translation += translation_error;
    rel.rotation = Eigen::AngleAxisd(yaw_error, up).toRotationMatrix() * rel.rotation;
    out.push_back({ground_truth[i].frame, rel});
  }
  return out;
}

void write_dataset(const SyntheticScene& scene, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "frames");
  save_map(scene.map, (dir / "map.cmap").string());
  save_trajectory(scene.ground_truth, (dir / "groundtruth.txt").string());
  const Trajectory odom =
      corrupt_odometry(scene.ground_truth, scene.noise.odometry_drift, scene.noise.odometry_yaw_walk, scene.seed);
  save_trajectory(odom, (dir / "odometry.txt").string());

  for (const auto& e : scene.ground_truth) {
    const RenderedFrame f = render_frame(scene, e.frame);
    char name[32];
    std::snprintf(name, sizeof(name), "%06lld", static_cast<long long>(e.frame));
    const fs::path fdir = dir / "frames" / name;
    fs::create_directories(fdir);
    write_pgm(f.labels, (fdir / "labels.pgm").string());
    write_pgm(f.edges, (fdir / "edges.pgm").string());
    write_pgm(f.dynamic, (fdir / "dynamic.pgm").string());
  }

  const CameraIntrinsics& k = scene.intrinsics;
  const TrajectoryEntry& first = scene.ground_truth.front();
  std::ofstream cfg(dir / "dataset.cfg", std::ios::binary);
  if (!cfg) throw std::runtime_error("cannot write dataset.cfg in " + dir.string());
  cfg << "# synthetic " << to_string(scene.preset) << " seed " << scene.seed << "\n";
  cfg << "frames_dir = frames\n";
  cfg << "odometry = odometry.txt\n";
  cfg << "ground_truth = groundtruth.txt\n";
  cfg << "fx = " << format_double(k.fx) << "\nfy = " << format_double(k.fy) << "\n";
  cfg << "cx = " << format_double(k.cx) << "\ncy = " << format_double(k.cy) << "\n";
  cfg << "width = " << k.width << "\nheight = " << k.height << "\n";
  cfg << "initial_frame = " << first.frame << "\n";
  const std::string pose_line = format_trajectory_line(first);
  cfg << "initial_pose = " << pose_line.substr(pose_line.find(' ') + 1) << "\n";
  cfg << "labels = ";
  for (std::size_t i = 0; i < scene.map.labels().size(); ++i) {
    cfg << (i ? "," : "") << scene.map.labels()[i].name;
  }
  cfg << "\n";
}

}  // namespace edgeloc
