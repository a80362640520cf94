#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "edgeloc/trajectory.hpp"

namespace edgeloc {

/// Error of one estimated frame against ground truth. Rotation errors are the
/// Z-Y-X angles of R_gt^T R_est in degrees.
struct FrameError {
  FrameId frame = 0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double translation_norm = 0.0;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double roll_deg = 0.0;
  double angle_deg = 0.0;
};

struct ErrorReport {
  std::size_t estimated_frames = 0;
  std::size_t ground_truth_frames = 0;
  /// Estimated frames that also appear in the ground truth.
  std::size_t matched_frames = 0;
  double rmse_x = 0.0;
  double rmse_y = 0.0;
  double rmse_z = 0.0;
  /// RMSE of the per-frame translation error norms.
  double rmse_norm = 0.0;
  double rmse_yaw_deg = 0.0;
  double rmse_pitch_deg = 0.0;
  double rmse_roll_deg = 0.0;
  /// RMSE of the per-frame rotation angle.
  double rmse_angle_deg = 0.0;
  double max_translation_error = 0.0;
  /// 1 - matched / ground-truth frames.
  double drop_rate = 0.0;
  std::vector<FrameError> frames;
};

FrameError frame_error(FrameId frame, const Pose& estimate, const Pose& ground_truth);

class NoOverlap : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matches frames by id; unmatched estimates are ignored. Throws NoOverlap if
/// no frame matches.
ErrorReport evaluate(const Trajectory& estimate, const Trajectory& ground_truth);

std::string format_report(const ErrorReport& report);

}  // namespace edgeloc
