#include "edgeloc/pipeline.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "edgeloc/edge_features.hpp"
#include "edgeloc/landmark_selection.hpp"
#include "edgeloc/pose_predictor.hpp"

namespace edgeloc {

namespace fs = std::filesystem;

namespace {

double manifest_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::runtime_error("dataset.cfg: missing " + key);
  double v = 0.0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::runtime_error("dataset.cfg: bad number for " + key);
  return v;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    out.push_back(b == std::string::npos ? std::string() : item.substr(b, e - b + 1));
  }
  return out;
}

FrameRecord make_record(FrameId frame, const Pose& prior, const AlignmentResult& result) {
  FrameRecord r;
  r.frame = frame;
  r.prior = prior;
  r.status = result.accepted ? "accepted" : "dropped:" + std::string(to_string(result.reject_reason));
  r.result = result;
  return r;
}

}  // namespace

DatasetManifest load_manifest(const fs::path& dataset_dir) {
  const fs::path cfg_path = dataset_dir / "dataset.cfg";
  std::ifstream in(cfg_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + cfg_path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto a = split_assignment(line)) kv[a->first] = a->second;
  }
  const auto path_of = [&](const std::string& key) -> std::optional<fs::path> {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.empty()) return std::nullopt;
    return dataset_dir / it->second;
  };

  DatasetManifest m;
  m.root = dataset_dir;
  m.frames_dir = path_of("frames_dir").value_or(dataset_dir / "frames");
  const auto odom = path_of("odometry");
  if (!odom) throw std::runtime_error("dataset.cfg: missing odometry");
  m.odometry = *odom;
  m.ground_truth = path_of("ground_truth");
  m.intrinsics.fx = manifest_number(kv, "fx");
  m.intrinsics.fy = manifest_number(kv, "fy");
  m.intrinsics.cx = manifest_number(kv, "cx");
  m.intrinsics.cy = manifest_number(kv, "cy");
  m.intrinsics.width = static_cast<int>(manifest_number(kv, "width"));
  m.intrinsics.height = static_cast<int>(manifest_number(kv, "height"));
  if (!m.intrinsics.valid()) throw std::runtime_error("dataset.cfg: invalid intrinsics");
  m.initial_frame = static_cast<FrameId>(manifest_number(kv, "initial_frame"));
  const auto pose_it = kv.find("initial_pose");
  if (pose_it == kv.end()) throw std::runtime_error("dataset.cfg: missing initial_pose");
  const Trajectory initial = parse_trajectory(std::to_string(m.initial_frame) + " " + pose_it->second);
  if (initial.size() != 1) throw std::runtime_error("dataset.cfg: bad initial_pose");
  m.initial_pose = initial.front().pose;
  const auto labels_it = kv.find("labels");
  if (labels_it == kv.end()) throw std::runtime_error("dataset.cfg: missing labels");
  m.labels = split_list(labels_it->second);
  if (m.labels.size() > 255) throw std::runtime_error("dataset.cfg: more than 255 labels");
  return m;
}

fs::path frame_directory(const DatasetManifest& manifest, FrameId frame) {
  char name[32];
  std::snprintf(name, sizeof(name), "%06lld", static_cast<long long>(frame));
  return manifest.frames_dir / name;
}

std::optional<FrameImages> load_frame(const DatasetManifest& manifest, FrameId frame) {
  const fs::path dir = frame_directory(manifest, frame);
  if (!fs::is_directory(dir)) return std::nullopt;
  FrameImages f;
  f.labels = read_pgm((dir / "labels.pgm").string());
  f.edges = read_pgm((dir / "edges.pgm").string());
  if (fs::exists(dir / "dynamic.pgm")) {
    f.dynamic = read_pgm((dir / "dynamic.pgm").string());
  } else {
    f.dynamic = ByteImage::Zero(f.labels.rows(), f.labels.cols());
  }
  const CameraIntrinsics& k = manifest.intrinsics;
  for (const ByteImage* img : {&f.labels, &f.edges, &f.dynamic}) {
    if (img->rows() != k.height || img->cols() != k.width) {
      throw ImageSizeMismatch("frame " + std::to_string(frame) + ": image size does not match the intrinsics");
    }
  }
  return f;
}

ByteImage remap_labels(const ByteImage& labels, const std::vector<std::string>& dataset_labels,
                       const CompactMap& map) {
  std::array<std::uint8_t, 256> lut{};
  for (std::size_t i = 0; i < dataset_labels.size() && i < 255; ++i) {
    if (const auto id = map.find_label(dataset_labels[i]); id && *id < 255) {
      lut[i + 1] = static_cast<std::uint8_t>(*id + 1);
    }
  }
  return labels.unaryExpr([&](std::uint8_t v) { return lut[v]; });
}

EdgeFieldSet build_fields(const FrameImages& images, std::size_t label_count, const Config& config, FrameId frame) {
  const std::vector<SemanticEdgeMask> masks =
      build_edge_masks(images.labels, images.edges, images.dynamic, label_count, config.boundary_margin_px, frame);
  EdgeFieldSet fields;
  fields.reserve(masks.size());
  for (const auto& m : masks) fields.push_back(build_edge_field(m, config.dt_truncation_px));
  return fields;
}

FrameLocalization localize_frame(const CompactMap& map, const EdgeFieldSet& fields, const Pose& prior,
                                 const CameraIntrinsics& k, const Config& config) {
  FrameLocalization out;
  out.samples = select_landmarks(map, prior, k, config.selection);
  const AlignmentProblem problem(out.samples, fields, prior, k, config.alignment);
  out.result = solve(problem);
  return out;
}

std::string format_log_line(const FrameRecord& record) {
  nlohmann::ordered_json j;
  j["frame"] = record.frame;
  j["status"] = record.status;
  if (record.result) {
    const AlignmentResult& r = *record.result;
    j["iterations"] = r.iterations;
    j["stop"] = to_string(r.stop_reason);
    j["samples"] = r.input_samples;
    j["active"] = r.inlier_count;
    j["energy"] = r.final_energy;
    j["mean_reproj_error"] = r.mean_reproj_error;
    j["min_information"] = r.min_information;
    j["correction_m"] = (r.pose.translation - record.prior.translation).norm();
    j["correction_deg"] = rotation_distance(r.pose, record.prior) * 180.0 / 3.14159265358979323846;
  }
  return j.dump();
}

RunResult run_localization(const CompactMap& map, const DatasetManifest& manifest, Config config,
                           const RunOptions& options) {
  if (!fs::is_directory(manifest.frames_dir) || fs::is_empty(manifest.frames_dir)) {
    throw std::runtime_error("frames directory is missing or empty: " + manifest.frames_dir.string());
  }
  resolve_label_weights(config, map);
  const Trajectory odometry = load_trajectory(manifest.odometry.string());
  const std::size_t label_count = map.labels().size();
  const CameraIntrinsics& k = manifest.intrinsics;

  const auto prepare = [&](FrameId frame) -> std::optional<EdgeFieldSet> {
    auto images = load_frame(manifest, frame);
    if (!images) return std::nullopt;
    images->labels = remap_labels(images->labels, manifest.labels, map);
    return build_fields(*images, label_count, config, frame);
  };

  PosePredictor predictor;
  predictor.initialize(manifest.initial_frame, manifest.initial_pose);
  RunResult out;

  std::future<std::optional<EdgeFieldSet>> pending;
  for (std::size_t i = 0; i < odometry.size(); ++i) {
    const FrameId frame = odometry[i].frame;
    predictor.push_odometry(frame, odometry[i].pose);

    std::optional<EdgeFieldSet> fields;
    if (options.staged) {
      fields = pending.valid() ? pending.get() : prepare(frame);
      if (i + 1 < odometry.size()) pending = std::async(std::launch::async, prepare, odometry[i + 1].frame);
    }

    FrameRecord skipped;
    skipped.frame = frame;
    if (frame < manifest.initial_frame) {
      skipped.status = "skipped:before-initial-frame";
      out.records.push_back(skipped);
      continue;
    }
    const Pose prior = frame == manifest.initial_frame ? manifest.initial_pose : predictor.predict_prior(frame);
    skipped.prior = prior;
    if (!options.staged) fields = prepare(frame);
    if (!fields) {
      skipped.status = "skipped:missing-frame";
      out.records.push_back(skipped);
      continue;
    }

    const FrameLocalization loc = localize_frame(map, *fields, prior, k, config);
    predictor.commit(frame, loc.result.pose, loc.result.accepted);
    if (loc.result.accepted) out.trajectory.push_back({frame, loc.result.pose});
    out.records.push_back(make_record(frame, prior, loc.result));
  }
  return out;
}

}  // namespace edgeloc
