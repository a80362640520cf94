#include "edgeloc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <unordered_map>

namespace edgeloc {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

double rms(double sum_sq, std::size_t n) { return n > 0 ? std::sqrt(sum_sq / static_cast<double>(n)) : 0.0; }

}  // namespace

FrameError frame_error(FrameId frame, const Pose& estimate, const Pose& ground_truth) {
  FrameError e;
  e.frame = frame;
  e.translation = estimate.translation - ground_truth.translation;
  e.translation_norm = e.translation.norm();
  const Matrix3<double> r = ground_truth.rotation.transpose() * estimate.rotation;
  const Eigen::Vector3d ypr = euler_zyx(r) * kRadToDeg;
  e.yaw_deg = ypr(0);
  e.pitch_deg = ypr(1);
  e.roll_deg = ypr(2);
  e.angle_deg = rotation_angle(r) * kRadToDeg;
  return e;
}

ErrorReport evaluate(const Trajectory& estimate, const Trajectory& ground_truth) {
  ErrorReport report;
  report.estimated_frames = estimate.size();
  report.ground_truth_frames = ground_truth.size();
  std::unordered_map<FrameId, const Pose*> gt;
  for (const auto& e : ground_truth) gt[e.frame] = &e.pose;

  for (const auto& e : estimate) {
    if (const auto it = gt.find(e.frame); it != gt.end()) report.frames.push_back(frame_error(e.frame, e.pose, *it->second));
  }
  if (report.frames.empty()) throw NoOverlap("estimate and ground truth share no frame ids");
  // Sum in frame order so the report does not depend on file line order.
  std::stable_sort(report.frames.begin(), report.frames.end(),
                   [](const FrameError& a, const FrameError& b) { return a.frame < b.frame; });

  double sx = 0, sy = 0, sz = 0, sn = 0, syaw = 0, spitch = 0, sroll = 0, sangle = 0;
  for (const FrameError& fe : report.frames) {
    sx += fe.translation.x() * fe.translation.x();
    sy += fe.translation.y() * fe.translation.y();
    sz += fe.translation.z() * fe.translation.z();
    sn += fe.translation_norm * fe.translation_norm;
    syaw += fe.yaw_deg * fe.yaw_deg;
    spitch += fe.pitch_deg * fe.pitch_deg;
    sroll += fe.roll_deg * fe.roll_deg;
    sangle += fe.angle_deg * fe.angle_deg;
    report.max_translation_error = std::max(report.max_translation_error, fe.translation_norm);
  }
  const std::size_t n = report.frames.size();
  report.matched_frames = n;
  report.rmse_x = rms(sx, n);
  report.rmse_y = rms(sy, n);
  report.rmse_z = rms(sz, n);
  report.rmse_norm = rms(sn, n);
  report.rmse_yaw_deg = rms(syaw, n);
  report.rmse_pitch_deg = rms(spitch, n);
  report.rmse_roll_deg = rms(sroll, n);
  report.rmse_angle_deg = rms(sangle, n);
  report.drop_rate = ground_truth.empty() ? 0.0 : 1.0 - static_cast<double>(n) / static_cast<double>(ground_truth.size());
  return report;
}

std::string format_report(const ErrorReport& r) {
  char buf[1024];
  std::snprintf(buf, sizeof(buf),
                "# translation RMSE in metres; norm is the RMSE of per-frame error norms\n"
                "# rotation RMSE in degrees of R_gt^T R_est (Z-Y-X); angle is the full rotation angle\n"
                "frames_estimated %zu\nframes_ground_truth %zu\nframes_matched %zu\n"
                "rmse_x %.6f\nrmse_y %.6f\nrmse_z %.6f\nrmse_norm %.6f\n"
                "rmse_yaw_deg %.6f\nrmse_pitch_deg %.6f\nrmse_roll_deg %.6f\nrmse_angle_deg %.6f\n"
                "max_translation_error %.6f\ndrop_rate %.6f\n",
                r.estimated_frames, r.ground_truth_frames, r.matched_frames, r.rmse_x, r.rmse_y, r.rmse_z,
                r.rmse_norm, r.rmse_yaw_deg, r.rmse_pitch_deg, r.rmse_roll_deg, r.rmse_angle_deg,
                r.max_translation_error, r.drop_rate);
  return buf;
}

}  // namespace edgeloc
