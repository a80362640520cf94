#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "edgeloc/compact_map.hpp"
#include "edgeloc/config.hpp"
#include "edgeloc/evaluation.hpp"
#include "edgeloc/pipeline.hpp"
#include "edgeloc/synthetic.hpp"
#include "edgeloc/trajectory.hpp"

namespace fs = std::filesystem;
using namespace edgeloc;

namespace {

struct RunArgs {
  std::string map, dataset, config, out, log;
  std::vector<std::string> overrides;
  bool staged = false;
};

struct EvaluateArgs {
  std::string est, gt, series;
};

struct MapStatsArgs {
  std::string map;
  std::size_t original_size = 0;
};

struct SynthArgs {
  std::string preset = "urban-straight";
  std::uint64_t seed = 1;
  std::string out;
  std::size_t frames = 0;
  double speed = 0.5;
  double drift = 0.0;
  double yaw_walk = 0.0;
  double jitter = 0.0;
  double dropout = 0.0;
  std::vector<std::string> occlusions;
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
}

int cmd_run(const RunArgs& a) {
  Config config;
  if (!a.config.empty()) config = load_config(a.config);
  for (const auto& o : a.overrides) apply_override(config, o);
  const CompactMap map = load_map(a.map);
  const DatasetManifest manifest = load_manifest(a.dataset);
  const RunResult result = run_localization(map, manifest, config, {.staged = a.staged});

  // Nothing is written until the whole run has succeeded.
  write_text(a.out, format_trajectory(result.trajectory));
  std::size_t accepted = 0;
  std::string log;
  for (const auto& r : result.records) {
    log += format_log_line(r);
    log += '\n';
    if (r.status == "accepted") ++accepted;
  }
  if (!a.log.empty()) write_text(a.log, log);
  std::printf("frames %zu accepted %zu\n", result.records.size(), accepted);
  return 0;
}

int cmd_evaluate(const EvaluateArgs& a) {
  const ErrorReport report = evaluate(load_trajectory(a.est), load_trajectory(a.gt));
  std::fputs(format_report(report).c_str(), stdout);
  if (!a.series.empty()) {
    std::string text = "# frame ex ey ez norm yaw_deg pitch_deg roll_deg angle_deg\n";
    for (const auto& f : report.frames) {
      text += std::to_string(f.frame);
      for (double v : {f.translation.x(), f.translation.y(), f.translation.z(), f.translation_norm, f.yaw_deg,
                       f.pitch_deg, f.roll_deg, f.angle_deg}) {
        text += ' ' + format_double(v);
      }
      text += '\n';
    }
    write_text(a.series, text);
  }
  return 0;
}

int cmd_map_stats(const MapStatsArgs& a) {
  const CompactMap map = load_map(a.map);
  const MapStatistics s = map_statistics(map, a.original_size);
  for (const auto& [name, count] : s.per_label) std::printf("label %s %zu\n", name.c_str(), count);
  std::printf("segments %zu\nwireframes %zu\nlandmarks %zu\n", s.segments, s.wireframes, s.total);
  std::printf("file_bytes %ju\n", static_cast<std::uintmax_t>(fs::file_size(a.map)));
  std::printf("compact_bytes %zu\noriginal_bytes %zu\ncompression_factor %.1f\n", s.compact_bytes,
              s.original_bytes, s.compression_factor);
  return 0;
}

// FIRST:LAST, optionally followed by :xmin,ymin,zmin,xmax,ymax,zmax in the
// camera frame.
OccluderBox parse_occlusion(const std::string& spec, const CameraIntrinsics& k) {
  long long first = 0, last = 0;
  double b[6];
  int used = 0;
  if (std::sscanf(spec.c_str(), "%lld:%lld%n", &first, &last, &used) != 2 || first > last) {
    throw CLI::ValidationError("--occlude", "expected FIRST:LAST[:xmin,ymin,zmin,xmax,ymax,zmax]: " + spec);
  }
  if (static_cast<std::size_t>(used) == spec.size()) return view_blocker(k, first, last);
  int tail = 0;
  if (std::sscanf(spec.c_str() + used, ":%lf,%lf,%lf,%lf,%lf,%lf%n", &b[0], &b[1], &b[2], &b[3], &b[4], &b[5],
                  &tail) != 6 ||
      static_cast<std::size_t>(used + tail) != spec.size()) {
    throw CLI::ValidationError("--occlude", "bad box in " + spec);
  }
  OccluderBox box;
  box.min = Eigen::Vector3d(b[0], b[1], b[2]);
  box.max = Eigen::Vector3d(b[3], b[4], b[5]);
  box.first_frame = first;
  box.last_frame = last;
  return box;
}

int cmd_synth(const SynthArgs& a) {
  SceneOptions options;
  options.preset = parse_preset(a.preset);
  options.seed = a.seed;
  options.frames = a.frames;
  options.speed_m_per_frame = a.speed;
  options.noise.odometry_drift = a.drift;
  options.noise.odometry_yaw_walk = a.yaw_walk;
  options.noise.edge_jitter_px = a.jitter;
  options.noise.edge_dropout = a.dropout;
  for (const auto& o : a.occlusions) options.noise.occluders.push_back(parse_occlusion(o, default_intrinsics()));
  const SyntheticScene scene = generate_scene(options);
  write_dataset(scene, a.out);
  std::printf("preset %s seed %llu frames %zu landmarks %zu\n", std::string(to_string(scene.preset)).c_str(),
              static_cast<unsigned long long>(scene.seed), scene.ground_truth.size(), scene.map.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Map-based camera localization by dense semantic edge alignment"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Localize every frame of a dataset against a compact map");
  run_cmd->add_option("--map", run.map, "Compact map file")->required();
  run_cmd->add_option("--dataset", run.dataset, "Dataset directory holding dataset.cfg")->required();
  run_cmd->add_option("--config", run.config, "key = value configuration file");
  run_cmd->add_option("--out", run.out, "Estimated trajectory output")->required();
  run_cmd->add_option("--log", run.log, "Per-frame JSON lines log");
  run_cmd->add_option("--set", run.overrides, "Override a configuration key (key=value); repeatable");
  run_cmd->add_flag("--staged", run.staged, "Overlap edge extraction of the next frame with alignment");

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compare an estimated trajectory with ground truth");
  eval_cmd->add_option("--est", eval.est, "Estimated trajectory")->required();
  eval_cmd->add_option("--gt", eval.gt, "Ground-truth trajectory")->required();
  eval_cmd->add_option("--series", eval.series, "Write per-frame errors to this file");

  MapStatsArgs stats;
  auto* stats_cmd = app.add_subcommand("map-stats", "Landmark counts and compression factor of a map");
  stats_cmd->add_option("--map", stats.map, "Compact map file")->required();
  stats_cmd->add_option("--original-size", stats.original_size, "Size in bytes of the source map")
      ->required()
      ->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--preset", synth.preset, "urban-straight, urban-corner or sparse")
      ->check(CLI::IsMember({"urban-straight", "urban-corner", "sparse"}));
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", synth.out, "Output dataset directory")->required();
  synth_cmd->add_option("--frames", synth.frames, "Frame count (0 for the preset default)");
  synth_cmd->add_option("--speed", synth.speed, "Metres travelled per frame")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--drift", synth.drift, "Odometry drift, metres per metre")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--yaw-walk", synth.yaw_walk, "Odometry heading walk, rad per sqrt(m)")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--jitter", synth.jitter, "Edge pixel jitter sigma, px")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--dropout", synth.dropout, "Edge pixel dropout probability")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--occlude", synth.occlusions,
                        "Occluder FIRST:LAST[:xmin,ymin,zmin,xmax,ymax,zmax] (camera frame); repeatable");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*eval_cmd) return cmd_evaluate(eval);
    if (*stats_cmd) return cmd_map_stats(stats);
    if (*synth_cmd) return cmd_synth(synth);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "edgeloc: error: %s\n", e.what());
    return 1;
  }
  return 0;
}
