#include "edgeloc/pose_predictor.hpp"

#include <algorithm>
#include <string>

namespace edgeloc {

PosePredictor::PosePredictor(std::size_t window) : window_(std::max<std::size_t>(window, 1)) {}

void PosePredictor::initialize(FrameId frame_id, const Pose& global_pose) {
  std::optional<Pose> odom;
  if (const Entry* e = find(frame_id)) odom = e->odometry;
  anchor_ = Anchor{frame_id, global_pose, odom};
}

void PosePredictor::push_odometry(FrameId frame_id, const Pose& odometry_pose) {
  if (!buffer_.empty() && frame_id <= buffer_.back().id) {
    throw OutOfOrderFrame("frame " + std::to_string(frame_id) + " is not newer than buffered frame " +
                          std::to_string(buffer_.back().id));
  }
  buffer_.push_back(Entry{frame_id, odometry_pose});
  // The anchor keeps its own odometry copy, so trimming never loses it.
  if (anchor_ && anchor_->id == frame_id) anchor_->odometry = odometry_pose;
  while (buffer_.size() > window_) buffer_.pop_front();
}

const PosePredictor::Entry* PosePredictor::find(FrameId id) const {
  const auto it = std::lower_bound(buffer_.begin(), buffer_.end(), id,
                                   [](const Entry& e, FrameId v) { return e.id < v; });
  if (it == buffer_.end() || it->id != id) return nullptr;
  return &*it;
}

OdometryDelta PosePredictor::relative_motion(FrameId frame_id) const {
  if (!anchor_) throw AnchorNotSet("pose predictor has no anchor");
  if (!anchor_->odometry) {
    throw MissingFrame("no odometry for anchor frame " + std::to_string(anchor_->id));
  }
  const Entry* e = find(frame_id);
  if (e == nullptr) throw MissingFrame("no odometry for frame " + std::to_string(frame_id));
  return OdometryDelta{anchor_->id, frame_id, compose(inverse(*anchor_->odometry), e->odometry)};
}

Pose PosePredictor::predict_prior(FrameId frame_id) const {
  const OdometryDelta delta = relative_motion(frame_id);
  const Pose& anchor = anchor_->global;
  return Pose(anchor.rotation * delta.relative.rotation,
              anchor.translation + anchor.rotation * delta.relative.translation);
}

void PosePredictor::commit(FrameId frame_id, const Pose& estimate, bool accepted) {
  const Entry* e = find(frame_id);
  if (e == nullptr) throw MissingFrame("cannot commit unbuffered frame " + std::to_string(frame_id));
  if (!accepted) return;
  anchor_ = Anchor{frame_id, estimate, e->odometry};
}

std::optional<FrameId> PosePredictor::anchor_frame() const {
  if (!anchor_) return std::nullopt;
  return anchor_->id;
}

const Pose& PosePredictor::anchor_pose() const {
  if (!anchor_) throw AnchorNotSet("pose predictor has no anchor");
  return anchor_->global;
}

FrameId PosePredictor::front_frame() const {
  if (buffer_.empty()) throw MissingFrame("odometry buffer is empty");
  return buffer_.front().id;
}

FrameId PosePredictor::back_frame() const {
  if (buffer_.empty()) throw MissingFrame("odometry buffer is empty");
  return buffer_.back().id;
}

}  // namespace edgeloc
