#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace edgeloc {

using LabelId = std::size_t;
using LandmarkId = std::size_t;

enum class LabelCategory { Road, NonRoad };

struct SemanticLabel {
  std::string name;
  LabelCategory category = LabelCategory::NonRoad;
  /// Segments of a pole label are expanded to cylinders for occlusion.
  bool pole = false;

  friend bool operator==(const SemanticLabel&, const SemanticLabel&) = default;
};

struct LineSegmentLandmark {
  LabelId label = 0;
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  std::optional<double> pole_radius;

  friend bool operator==(const LineSegmentLandmark&, const LineSegmentLandmark&) = default;
};

/// Closed planar polygon; rectangles have four points.
struct WireframeLandmark {
  LabelId label = 0;
  std::vector<Eigen::Vector3d> points;

  friend bool operator==(const WireframeLandmark&, const WireframeLandmark&) = default;
};

using Landmark = std::variant<LineSegmentLandmark, WireframeLandmark>;

inline constexpr double kMinEdgeLength = 0.01;
inline constexpr double kMaxPlanarityDeviation = 0.05;
inline constexpr double kDefaultPoleRadius = 0.15;

class MapParseError : public std::runtime_error {
 public:
  MapParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MapInvariantError : public std::runtime_error {
 public:
  MapInvariantError(LandmarkId id, const std::string& what)
      : std::runtime_error("landmark " + std::to_string(id) + ": " + what), id_(id) {}
  LandmarkId landmark() const { return id_; }

 private:
  LandmarkId id_;
};

/// Labelled line segments and wireframes in world coordinates. Landmark ids
/// are positions in `landmarks()`.
class CompactMap {
 public:
  LabelId add_label(SemanticLabel label);
  /// Appends a landmark after validating it; returns its id.
  LandmarkId add(Landmark landmark);

  const std::vector<SemanticLabel>& labels() const { return labels_; }
  const std::vector<Landmark>& landmarks() const { return landmarks_; }
  const SemanticLabel& label(LabelId id) const { return labels_.at(id); }
  std::optional<LabelId> find_label(std::string_view name) const;

  std::size_t size() const { return landmarks_.size(); }
  bool empty() const { return landmarks_.empty(); }

  friend bool operator==(const CompactMap&, const CompactMap&) = default;

 private:
  std::vector<SemanticLabel> labels_;
  std::vector<Landmark> landmarks_;
};

LabelId landmark_label(const Landmark& landmark);

/// Throws MapInvariantError if the landmark violates the geometric invariants.
void validate_landmark(const Landmark& landmark, LandmarkId id, std::size_t label_count);

/// Max distance of the points to their least-squares plane.
double planarity_deviation(const std::vector<Eigen::Vector3d>& points);

/// Reads the line-oriented `CMAP 1` text format.
CompactMap parse_map(std::string_view text);
std::string serialize_map(const CompactMap& map);

CompactMap load_map(const std::string& path);
void save_map(const CompactMap& map, const std::string& path);

struct MapStatistics {
  /// Landmark count per label name, in registry order.
  std::vector<std::pair<std::string, std::size_t>> per_label;
  std::size_t segments = 0;
  std::size_t wireframes = 0;
  std::size_t total = 0;
  std::size_t compact_bytes = 0;
  std::size_t original_bytes = 0;
  double compression_factor = 0.0;
};

double compression_factor(double original_bytes, double compact_bytes);

MapStatistics map_statistics(const CompactMap& map, std::size_t original_bytes);

}  // namespace edgeloc
