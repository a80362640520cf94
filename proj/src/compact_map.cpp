#include "edgeloc/compact_map.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace edgeloc {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  // from_chars rejects a leading '+'.
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw MapParseError(line, "invalid number '" + std::string(s) + "'");
  }
  return v;
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw MapParseError(line, "invalid count '" + std::string(s) + "'");
  }
  return v;
}

void append_number(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

void append_point(std::string& out, const Eigen::Vector3d& p) {
  for (int k = 0; k < 3; ++k) {
    out.push_back(' ');
    append_number(out, p[k]);
  }
}

}  // namespace

LabelId CompactMap::add_label(SemanticLabel label) {
  if (label.name.empty()) throw std::invalid_argument("label name must be non-empty");
  if (find_label(label.name)) throw std::invalid_argument("duplicate label '" + label.name + "'");
  labels_.push_back(std::move(label));
  return labels_.size() - 1;
}

LandmarkId CompactMap::add(Landmark landmark) {
  const LandmarkId id = landmarks_.size();
  validate_landmark(landmark, id, labels_.size());
  landmarks_.push_back(std::move(landmark));
  return id;
}

std::optional<LabelId> CompactMap::find_label(std::string_view name) const {
  for (LabelId i = 0; i < labels_.size(); ++i) {
    if (labels_[i].name == name) return i;
  }
  return std::nullopt;
}

LabelId landmark_label(const Landmark& landmark) {
  return std::visit([](const auto& l) { return l.label; }, landmark);
}

double planarity_deviation(const std::vector<Eigen::Vector3d>& points) {
  if (points.size() < 4) return 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d normal = es.eigenvectors().col(0);
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, std::abs(normal.dot(p - mean)));
  return worst;
}

void validate_landmark(const Landmark& landmark, LandmarkId id, std::size_t label_count) {
  if (landmark_label(landmark) >= label_count) throw MapInvariantError(id, "unknown label");
  if (const auto* seg = std::get_if<LineSegmentLandmark>(&landmark)) {
    if (!seg->p0.allFinite() || !seg->p1.allFinite()) throw MapInvariantError(id, "non-finite coordinate");
    if ((seg->p1 - seg->p0).norm() <= kMinEdgeLength) throw MapInvariantError(id, "degenerate segment");
    if (seg->pole_radius && !(*seg->pole_radius > 0.0)) throw MapInvariantError(id, "pole radius must be positive");
    return;
  }
  const auto& wf = std::get<WireframeLandmark>(landmark);
  if (wf.points.size() < 3) throw MapInvariantError(id, "wireframe needs at least 3 points");
  for (std::size_t i = 0; i < wf.points.size(); ++i) {
    if (!wf.points[i].allFinite()) throw MapInvariantError(id, "non-finite coordinate");
    const auto& next = wf.points[(i + 1) % wf.points.size()];
    if ((next - wf.points[i]).norm() < kMinEdgeLength) throw MapInvariantError(id, "coincident consecutive points");
  }
  if (planarity_deviation(wf.points) > kMaxPlanarityDeviation) throw MapInvariantError(id, "wireframe is not planar");
}

CompactMap parse_map(std::string_view text) {
  CompactMap map;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto f = split_fields(line);
    if (f.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (!header_seen) {
      if (f.size() != 2 || f[0] != "CMAP") throw MapParseError(line_no, "missing 'CMAP 1' header");
      if (f[1] != "1") throw MapParseError(line_no, "unsupported map version " + std::string(f[1]));
      header_seen = true;
      continue;
    }
    const std::string_view kind = f[0];
    if (kind == "LABEL") {
      if (f.size() < 3 || f.size() > 4) throw MapParseError(line_no, "LABEL expects <name> <road|nonroad> [pole]");
      SemanticLabel label;
      label.name = std::string(f[1]);
      if (f[2] == "road") {
        label.category = LabelCategory::Road;
      } else if (f[2] == "nonroad") {
        label.category = LabelCategory::NonRoad;
      } else {
        throw MapParseError(line_no, "unknown label category '" + std::string(f[2]) + "'");
      }
      if (f.size() == 4) {
        if (f[3] != "pole") throw MapParseError(line_no, "unknown label flag '" + std::string(f[3]) + "'");
        label.pole = true;
      }
      try {
        map.add_label(std::move(label));
      } catch (const std::invalid_argument& e) {
        throw MapParseError(line_no, e.what());
      }
    } else if (kind == "SEG") {
      if (f.size() != 8 && f.size() != 9) throw MapParseError(line_no, "SEG expects 7 or 8 fields");
      const auto label = map.find_label(f[1]);
      if (!label) throw MapParseError(line_no, "undeclared label '" + std::string(f[1]) + "'");
      LineSegmentLandmark seg;
      seg.label = *label;
      seg.p0 = {parse_double(f[2], line_no), parse_double(f[3], line_no), parse_double(f[4], line_no)};
      seg.p1 = {parse_double(f[5], line_no), parse_double(f[6], line_no), parse_double(f[7], line_no)};
      if (f.size() == 9) {
        constexpr std::string_view key = "radius=";
        if (!f[8].starts_with(key)) throw MapParseError(line_no, "expected radius=<r>");
        seg.pole_radius = parse_double(f[8].substr(key.size()), line_no);
      }
      map.add(std::move(seg));
    } else if (kind == "WF") {
      if (f.size() < 3) throw MapParseError(line_no, "WF expects <label> <n> <points...>");
      const auto label = map.find_label(f[1]);
      if (!label) throw MapParseError(line_no, "undeclared label '" + std::string(f[1]) + "'");
      const std::size_t n = parse_count(f[2], line_no);
      if (f.size() != 3 + 3 * n) throw MapParseError(line_no, "WF point count does not match coordinates");
      WireframeLandmark wf;
      wf.label = *label;
      for (std::size_t i = 0; i < n; ++i) {
        wf.points.emplace_back(parse_double(f[3 + 3 * i], line_no), parse_double(f[4 + 3 * i], line_no),
                               parse_double(f[5 + 3 * i], line_no));
      }
      map.add(std::move(wf));
    } else {
      throw MapParseError(line_no, "unknown record '" + std::string(kind) + "'");
    }
    if (end == text.size()) break;
  }
  if (!header_seen) throw MapParseError(line_no == 0 ? 1 : line_no, "missing 'CMAP 1' header");
  return map;
}

std::string serialize_map(const CompactMap& map) {
  std::string out = "CMAP 1\n";
  for (const auto& label : map.labels()) {
    out += "LABEL ";
    out += label.name;
    out += label.category == LabelCategory::Road ? " road" : " nonroad";
    if (label.pole) out += " pole";
    out += '\n';
  }
  for (const auto& landmark : map.landmarks()) {
    if (const auto* seg = std::get_if<LineSegmentLandmark>(&landmark)) {
      out += "SEG ";
      out += map.label(seg->label).name;
      append_point(out, seg->p0);
      append_point(out, seg->p1);
      if (seg->pole_radius) {
        out += " radius=";
        append_number(out, *seg->pole_radius);
      }
    } else {
      const auto& wf = std::get<WireframeLandmark>(landmark);
      out += "WF ";
      out += map.label(wf.label).name;
      out += ' ';
      out += std::to_string(wf.points.size());
      for (const auto& p : wf.points) append_point(out, p);
    }
    out += '\n';
  }
  return out;
}

CompactMap load_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_map(ss.str());
}

void save_map(const CompactMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write map file: " + path);
  out << serialize_map(map);
}

double compression_factor(double original_bytes, double compact_bytes) {
  if (!(original_bytes > 0.0)) throw std::invalid_argument("original size must be positive");
  if (!(compact_bytes > 0.0)) throw std::invalid_argument("compact size must be positive");
  return original_bytes / compact_bytes;
}

MapStatistics map_statistics(const CompactMap& map, std::size_t original_bytes) {
  if (original_bytes == 0) throw std::invalid_argument("original size must be positive");
  MapStatistics stats;
  stats.per_label.reserve(map.labels().size());
  for (const auto& label : map.labels()) stats.per_label.emplace_back(label.name, 0);
  for (const auto& landmark : map.landmarks()) {
    ++stats.per_label[landmark_label(landmark)].second;
    if (std::holds_alternative<LineSegmentLandmark>(landmark)) {
      ++stats.segments;
    } else {
      ++stats.wireframes;
    }
  }
  stats.total = map.size();
  stats.compact_bytes = serialize_map(map).size();
  stats.original_bytes = original_bytes;
  stats.compression_factor = compression_factor(static_cast<double>(original_bytes),
                                                static_cast<double>(stats.compact_bytes));
  return stats;
}

}  // namespace edgeloc
