#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgeloc/alignment.hpp"
#include "edgeloc/compact_map.hpp"
#include "edgeloc/config.hpp"
#include "edgeloc/image.hpp"
#include "edgeloc/trajectory.hpp"

namespace edgeloc {

/// Contents of <dataset>/dataset.cfg with paths resolved against the dataset
/// directory.
struct DatasetManifest {
  std::filesystem::path root;
  std::filesystem::path frames_dir;
  std::filesystem::path odometry;
  std::optional<std::filesystem::path> ground_truth;
  CameraIntrinsics intrinsics;
  FrameId initial_frame = 0;
  Pose initial_pose;
  /// Label-image value k (k >= 1) is labels[k - 1].
  std::vector<std::string> labels;
};

DatasetManifest load_manifest(const std::filesystem::path& dataset_dir);

std::filesystem::path frame_directory(const DatasetManifest& manifest, FrameId frame);

struct FrameImages {
  ByteImage labels;
  ByteImage edges;
  ByteImage dynamic;
};

/// Nothing if the frame directory does not exist.
std::optional<FrameImages> load_frame(const DatasetManifest& manifest, FrameId frame);

/// Rewrites dataset label values to map label id + 1; values naming labels
/// the map lacks become 0.
ByteImage remap_labels(const ByteImage& labels, const std::vector<std::string>& dataset_labels,
                       const CompactMap& map);

/// One field per map label from images whose label values are map ids + 1.
EdgeFieldSet build_fields(const FrameImages& images, std::size_t label_count, const Config& config,
                          FrameId frame = 0);

struct FrameLocalization {
  LandmarkSamples samples;
  AlignmentResult result;
};

/// Landmark selection at `prior` followed by alignment.
FrameLocalization localize_frame(const CompactMap& map, const EdgeFieldSet& fields, const Pose& prior,
                                 const CameraIntrinsics& k, const Config& config);

struct FrameRecord {
  FrameId frame = 0;
  /// "accepted", "dropped:<reject reason>" or "skipped:<why>".
  std::string status;
  Pose prior;
  std::optional<AlignmentResult> result;
};

std::string format_log_line(const FrameRecord& record);

struct RunOptions {
  /// Builds the next frame's fields concurrently with the current alignment.
  bool staged = false;
};

struct RunResult {
  /// Accepted frames only.
  Trajectory trajectory;
  std::vector<FrameRecord> records;
};

/// Processes every odometry frame in order. Throws if the frames directory is
/// missing or empty, or the map lacks a label the configuration names.
RunResult run_localization(const CompactMap& map, const DatasetManifest& manifest, Config config,
                           const RunOptions& options = {});

}  // namespace edgeloc
