#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "edgeloc/compact_map.hpp"
#include "edgeloc/geometry.hpp"
#include "edgeloc/image.hpp"

namespace edgeloc {

struct SelectionConfig {
  double sample_spacing_px = 4.0;
  double depth_tolerance_m = 0.1;
  double default_pole_radius_m = kDefaultPoleRadius;
  double max_selection_range_m = 150.0;
  /// Near clipping plane for sampling and rasterization.
  double near_plane_m = 0.1;
};

/// One visible edge sample in the prior camera frame r.
struct LandmarkSample {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  /// Unit direction of the source edge, frame r.
  Eigen::Vector3d tangent = Eigen::Vector3d::UnitX();
  LandmarkId landmark = 0;
  LabelId label = 0;
};

/// Visible samples grouped by label; `by_label[l]` holds the samples of label l.
struct LandmarkSamples {
  std::vector<std::vector<LandmarkSample>> by_label;

  std::size_t size() const;
  std::size_t distinct_landmarks() const;
};

/// Minimum-depth raster at camera resolution. Each filled pixel remembers the
/// occluder that wrote it so an occluder never hides its own edges.
class DepthBuffer {
 public:
  static constexpr std::int32_t kNoOwner = -1;

  DepthBuffer(int width, int height);

  int width() const { return static_cast<int>(depth_.cols()); }
  int height() const { return static_cast<int>(depth_.rows()); }

  double depth(int u, int v) const { return depth_(v, u); }
  std::int32_t owner(int u, int v) const { return owner_(v, u); }
  const FieldImage& depths() const { return depth_; }

  /// Fills a planar polygon given in camera coordinates; fan-triangulated from
  /// vertex 0 after clipping against z >= near.
  void fill_polygon(std::span<const Eigen::Vector3d> polygon, std::int32_t owner,
                    const CameraIntrinsics& k, double near);

  /// True if a point of `owner` at `point` (camera frame) is hidden.
  bool occludes(const Eigen::Vector3d& point, std::int32_t owner, const CameraIntrinsics& k,
                double tolerance) const;

  std::size_t filled_pixels() const;

 private:
  FieldImage depth_;
  Image<std::int32_t> owner_;
};

/// Closed polygon that occludes for `landmark`, in frame r, if it is an
/// occluder: non-road wireframes and pole cylinders (silhouette quad).
std::optional<std::vector<Eigen::Vector3d>> occluder_polygon(const CompactMap& map, LandmarkId id,
                                                            const Pose& camera_from_world,
                                                            const SelectionConfig& cfg);

/// 3D edges whose image is the landmark outline, frame r. Poles yield both
/// silhouette lines, wireframes all polygon sides.
std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> landmark_edges(const CompactMap& map, LandmarkId id,
                                                                        const Pose& camera_from_world,
                                                                        const SelectionConfig& cfg);

/// Clips a 3D segment (camera frame) to the image frustum between the near
/// plane and `far`. Returns nothing if no part survives.
std::optional<std::pair<Eigen::Vector3d, Eigen::Vector3d>> clip_to_frustum(const Eigen::Vector3d& a,
                                                                           const Eigen::Vector3d& b,
                                                                           const CameraIntrinsics& k,
                                                                           double near, double far);

/// Points along a camera-frame segment, evenly spaced in the image so that
/// consecutive projections are at most `spacing_px` apart. Clips first.
std::vector<Eigen::Vector3d> sample_segment(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                            const CameraIntrinsics& k, double spacing_px, double near,
                                            double far);

/// Samples every outline edge of one landmark seen from `prior` (T^w_r).
/// Returned points are in frame r; no occlusion test.
std::vector<Eigen::Vector3d> sample_landmark_edges(const CompactMap& map, LandmarkId id, const Pose& prior,
                                                   const CameraIntrinsics& k, const SelectionConfig& cfg);

/// Landmarks with at least part of an edge inside the view frustum.
std::vector<LandmarkId> frustum_cull(const CompactMap& map, const Pose& prior, const CameraIntrinsics& k,
                                     const SelectionConfig& cfg);

DepthBuffer rasterize_occluders(const CompactMap& map, std::span<const LandmarkId> ids, const Pose& prior,
                                const CameraIntrinsics& k, const SelectionConfig& cfg);

/// Frustum cull, occluder rasterization, edge sampling and the depth test.
LandmarkSamples select_landmarks(const CompactMap& map, const Pose& prior, const CameraIntrinsics& k,
                                 const SelectionConfig& cfg = {});

}  // namespace edgeloc
