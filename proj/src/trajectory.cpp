#include "edgeloc/trajectory.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edgeloc {

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string format_trajectory_line(const TrajectoryEntry& entry) {
  Eigen::Quaterniond q = entry.pose.quaternion().normalized();
  if (q.w() < 0) q.coeffs() = -q.coeffs();
  const Eigen::Vector3d& t = entry.pose.translation;
  std::string line = std::to_string(entry.frame);
  for (const double v : {t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w()}) {
    line += ' ';
    line += format_double(v);
  }
  return line;
}

std::string format_trajectory(const Trajectory& trajectory) {
  std::string out;
  for (const auto& e : trajectory) {
    out += format_trajectory_line(e);
    out += '\n';
  }
  return out;
}

Trajectory parse_trajectory(std::string_view text) {
  Trajectory out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    long long id = 0;
    if (!(fields >> id)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": expected frame id");
    }
    double v[7];
    for (double& x : v) {
      if (!(fields >> x)) {
        throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": expected 7 pose values");
      }
    }
    const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
    if (q.norm() < 1e-9) throw std::runtime_error("trajectory line " + std::to_string(line_no) + ": zero quaternion");
    out.push_back({static_cast<FrameId>(id), Pose::from_quaternion(q, Eigen::Vector3d(v[0], v[1], v[2]))});
  }
  return out;
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trajectory: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trajectory(ss.str());
}

void save_trajectory(const Trajectory& trajectory, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trajectory: " + path);
  out << format_trajectory(trajectory);
}

}  // namespace edgeloc
