#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "edgeloc/compact_map.hpp"
#include "edgeloc/geometry.hpp"
#include "edgeloc/image.hpp"
#include "edgeloc/trajectory.hpp"

namespace edgeloc {

enum class ScenePreset { UrbanStraight, UrbanCorner, Sparse };

std::string_view to_string(ScenePreset preset);
/// Accepts "urban-straight", "urban-corner" and "sparse".
ScenePreset parse_preset(std::string_view name);

/// Landmark counts per label, in registry order.
struct LandmarkCounts {
  std::size_t lane_line = 0;
  std::size_t lamp_pole = 0;
  std::size_t building_edge = 0;
  std::size_t rectangle_mark = 0;
  std::size_t traffic_sign = 0;

  std::size_t total() const { return lane_line + lamp_pole + building_edge + rectangle_mark + traffic_sign; }
};

LandmarkCounts preset_counts(ScenePreset preset);
double preset_road_length(ScenePreset preset);

/// Axis-aligned box that hides edges and marks the dynamic mask while
/// `first_frame <= frame <= last_frame`. Camera-attached boxes are given in
/// the camera frame, others in the world frame.
struct OccluderBox {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
  bool camera_attached = true;
  FrameId first_frame = 0;
  FrameId last_frame = 0;

  bool active(FrameId frame) const { return frame >= first_frame && frame <= last_frame; }
};

/// Camera-attached box 2 m ahead covering the central `coverage` fraction of
/// the image width and height, active for frames first..last.
OccluderBox view_blocker(const CameraIntrinsics& k, FrameId first, FrameId last, double coverage = 0.9);

struct NoiseConfig {
  /// Odometry translation drift, metres per metre travelled.
  double odometry_drift = 0.0;
  /// Odometry heading random walk, radians per square-root metre.
  double odometry_yaw_walk = 0.0;
  /// Standard deviation of the per-pixel displacement of edge pixels.
  double edge_jitter_px = 0.0;
  /// Probability that an edge pixel is dropped.
  double edge_dropout = 0.0;
  std::vector<OccluderBox> occluders;
};

struct SceneOptions {
  ScenePreset preset = ScenePreset::UrbanStraight;
  std::uint64_t seed = 0;
  /// Number of frames; 0 picks the preset default.
  std::size_t frames = 0;
  double speed_m_per_frame = 0.5;
  NoiseConfig noise;
  /// Minimum number of landmarks in view on every frame.
  std::size_t min_visible_landmarks = 8;
};

struct SyntheticScene {
  ScenePreset preset = ScenePreset::UrbanStraight;
  std::uint64_t seed = 0;
  CompactMap map;
  CameraIntrinsics intrinsics;
  Trajectory ground_truth;
  NoiseConfig noise;
  LandmarkCounts counts;
  double road_length_m = 0.0;

  const Pose& pose(FrameId frame) const;
};

/// 640x400, f = 420 px, principal point at the image centre.
CameraIntrinsics default_intrinsics();

/// Deterministic in (options, seed). Throws std::runtime_error if no layout
/// satisfies the visibility constraint.
SyntheticScene generate_scene(const SceneOptions& options);

/// One rendered edge pixel before and after jitter.
struct RenderedPixel {
  int clean_u = 0;
  int clean_v = 0;
  int u = 0;
  int v = 0;
  LabelId label = 0;
};

struct RenderedFrame {
  FrameId frame = 0;
  /// Label index + 1 at edge pixels, 0 elsewhere.
  ByteImage labels;
  /// 255 at edge pixels.
  ByteImage edges;
  /// 255 where a dynamic occluder covers the image.
  ByteImage dynamic;
  /// Every surviving edge pixel, in draw order.
  std::vector<RenderedPixel> pixels;
};

/// Draws every pixel whose centre lies within 0.5 px of a visible projected
/// landmark edge at the ground-truth pose, then applies dropout and jitter.
RenderedFrame render_frame(const SyntheticScene& scene, FrameId frame);

/// Drifting odometry in the gauge of the first frame: the first entry is the
/// identity. Translation error grows by `drift` per metre along a slowly
/// wandering direction; heading follows a random walk.
Trajectory corrupt_odometry(const Trajectory& ground_truth, double drift, double yaw_walk, std::uint64_t seed);

/// Writes dataset.cfg, map.cmap, odometry.txt, groundtruth.txt and
/// frames/<id>/{labels,edges,dynamic}.pgm.
void write_dataset(const SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace edgeloc
