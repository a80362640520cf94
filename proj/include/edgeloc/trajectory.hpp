#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "edgeloc/geometry.hpp"
#include "edgeloc/pose_predictor.hpp"

namespace edgeloc {

struct TrajectoryEntry {
  FrameId frame = 0;
  Pose pose;
};

using Trajectory = std::vector<TrajectoryEntry>;

/// `<frame_id> <tx> <ty> <tz> <qx> <qy> <qz> <qw>` per line; '#' comments.
Trajectory parse_trajectory(std::string_view text);
std::string format_trajectory(const Trajectory& trajectory);
std::string format_trajectory_line(const TrajectoryEntry& entry);

Trajectory load_trajectory(const std::string& path);
void save_trajectory(const Trajectory& trajectory, const std::string& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace edgeloc
