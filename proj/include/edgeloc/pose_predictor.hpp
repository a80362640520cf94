#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>

#include "edgeloc/geometry.hpp"

namespace edgeloc {

using FrameId = std::int64_t;

class OutOfOrderFrame : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingFrame : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class AnchorNotSet : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Relative camera motion between two frames, R^{c_l}_r and t^{c_l}_r.
struct OdometryDelta {
  FrameId reference_frame_id = 0;
  FrameId frame_id = 0;
  Pose relative;
};

/// Predicts the prior camera pose of a frame from the latest reliably
/// localized frame c_l and the odometry chain:
///
///   t^w_r = t^w_{c_l} + R^w_{c_l} t^{c_l}_r,   R^w_r = R^w_{c_l} R^{c_l}_r
///
/// Odometry is buffered as absolute poses in the odometry's own frame, so the
/// relative motion to any buffered frame is exact no matter how many frames in
/// between were rejected. Not internally synchronized.
class PosePredictor {
 public:
  static constexpr std::size_t kDefaultWindow = 1000;

  explicit PosePredictor(std::size_t window = kDefaultWindow);

  /// Sets the external initial global pose of `frame_id`.
  void initialize(FrameId frame_id, const Pose& global_pose);

  void push_odometry(FrameId frame_id, const Pose& odometry_pose);

  OdometryDelta relative_motion(FrameId frame_id) const;
  Pose predict_prior(FrameId frame_id) const;

  /// Moves the anchor to `frame_id` when accepted; otherwise no-op.
  void commit(FrameId frame_id, const Pose& estimate, bool accepted);

  std::optional<FrameId> anchor_frame() const;
  const Pose& anchor_pose() const;
  std::size_t buffered() const { return buffer_.size(); }
  FrameId front_frame() const;
  FrameId back_frame() const;

 private:
  struct Entry {
    FrameId id;
    Pose odometry;
  };
  struct Anchor {
    FrameId id;
    Pose global;
    std::optional<Pose> odometry;
  };

  const Entry* find(FrameId id) const;

  std::size_t window_;
  std::deque<Entry> buffer_;
  std::optional<Anchor> anchor_;
};

}  // namespace edgeloc
