// Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails. An optional argument names the scratch directory.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "edgeloc/compact_map.hpp"
#include "edgeloc/config.hpp"
#include "edgeloc/edge_features.hpp"
#include "edgeloc/evaluation.hpp"
#include "edgeloc/pipeline.hpp"
#include "edgeloc/random.hpp"
#include "edgeloc/synthetic.hpp"

#include "../support/oracles.hpp"

namespace fs = std::filesystem;
using namespace edgeloc;

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;
constexpr std::uint64_t kSeed = 1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// ---------------------------------------------------------------------------

Outcome distance_transform_exactness() {
  CounterRng rng(kSeed, 1);
  int mismatched_masks = 0;
  for (int i = 0; i < 100; ++i) {
    const ByteImage mask = oracle::random_mask(rng, 64);
    const SquaredDistanceImage got = squared_distance_transform(mask);
    const SquaredDistanceImage want = oracle::brute_force_sqdist(mask);
    const SemanticEdgeField field = distance_transform(mask, kDefaultTruncationPx);
    bool same = got == want;
    for (int v = 0; same && v < mask.rows(); ++v) {
      for (int u = 0; u < mask.cols(); ++u) {
        const double d = want(v, u) == kNoEdge ? kDefaultTruncationPx
                                               : std::min(kDefaultTruncationPx, std::sqrt(double(want(v, u))));
        if (field.value(v, u) != d) same = false;
      }
    }
    if (!same) ++mismatched_masks;
  }
  return {mismatched_masks == 0, fmt("%d of 100 masks differ from brute force", mismatched_masks)};
}

Outcome jacobian_correctness() {
  CounterRng rng(kSeed, 2);
  CameraIntrinsics k{420.0, 420.0, 159.5, 119.5, 320, 240};
  constexpr double kRidgeRadius = 2.0;
  int checked = 0, attempts = 0;
  double worst = 0.0;
  while (checked < 1000 && attempts < 100000) {
    ++attempts;
    const oracle::LineField lines = oracle::random_line_field(rng, k.width, k.height);
    EdgeFieldSet fields{build_edge_field({0, lines.mask(k.width, k.height), 0}, lines.truncation)};

    const Pose prior = oracle::random_pose(rng, 50.0);
    const Pose pose = retract(prior, Twist(Twist::Random() * 0.05));
    const double u = rng.uniform(3.0, k.width - 4.0);
    const double v = rng.uniform(3.0, k.height - 4.0);
    if (!lines.away_from_ridges(u, v, kRidgeRadius)) continue;
    const double z = rng.uniform(2.0, 60.0);
    const Eigen::Vector3d pc((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
    LandmarkSamples samples;
    samples.by_label.resize(1);
    LandmarkSample s;
    s.point = inverse(prior) * (pose * pc);
    samples.by_label[0].push_back(s);

    const AlignmentProblem problem(samples, fields, prior, k);
    const auto analytic = jacobian_row(problem, pose, s);
    const auto numeric = oracle::numeric_jacobian(problem, pose, s, 1e-6);
    if (!analytic || !numeric) continue;
    const double scale = std::max(analytic->norm(), 1e-12);
    worst = std::max(worst, (*analytic - *numeric).norm() / scale);
    ++checked;
  }
  return {checked == 1000 && worst < 1e-3, fmt("%d triples, worst relative error %.3g (< 1e-3)", checked, worst)};
}

Outcome noiseless_closed_loop() {
  SceneOptions options;
  options.preset = ScenePreset::UrbanStraight;
  options.seed = kSeed;
  options.frames = 100;
  const SyntheticScene scene = generate_scene(options);
  Config config;
  resolve_label_weights(config, scene.map);

  CounterRng rng(kSeed, 3);
  std::size_t accepted = 0;
  double sum_t = 0.0, sum_r = 0.0;
  for (const auto& gt : scene.ground_truth) {
    const RenderedFrame frame = render_frame(scene, gt.frame);
    const EdgeFieldSet fields =
        build_fields({frame.labels, frame.edges, frame.dynamic}, scene.map.labels().size(), config, gt.frame);
    Pose prior = gt.pose;
    prior.translation += oracle::random_unit(rng) * 0.3;
    prior.rotation = prior.rotation * so3_exp(oracle::random_unit(rng) * (1.0 / kRadToDeg));
    const FrameLocalization loc = localize_frame(scene.map, fields, prior, scene.intrinsics, config);
    if (!loc.result.accepted) continue;
    ++accepted;
    sum_t += (loc.result.pose.translation - gt.pose.translation).squaredNorm();
    sum_r += std::pow(rotation_distance(loc.result.pose, gt.pose) * kRadToDeg, 2);
  }
  const double n = static_cast<double>(scene.ground_truth.size());
  const double rate = accepted / n;
  const double rmse_t = accepted ? std::sqrt(sum_t / accepted) : 0.0;
  const double rmse_r = accepted ? std::sqrt(sum_r / accepted) : 0.0;
  return {accepted > 0 && rate >= 0.99 && rmse_t < 5e-3 && rmse_r < 0.05,
          fmt("accepted %.0f%% (>= 99%%), RMSE %.4f m (< 0.005), %.4f deg (< 0.05)", 100.0 * rate, rmse_t, rmse_r)};
}

// Synthesizes a dataset into `dir`, runs the pipeline from files and writes
// est.txt and log.jsonl next to it.
RunResult run_from_files(const SceneOptions& options, const fs::path& dir,
                         const std::function<void(SyntheticScene&)>& edit = {}) {
  fs::remove_all(dir);
  SyntheticScene scene = generate_scene(options);
  if (edit) edit(scene);
  write_dataset(scene, dir);
  const CompactMap map = load_map((dir / "map.cmap").string());
  const RunResult result = run_localization(map, load_manifest(dir), Config{});
  write_file(dir / "est.txt", format_trajectory(result.trajectory));
  std::string log;
  for (const auto& r : result.records) log += format_log_line(r) + "\n";
  write_file(dir / "log.jsonl", log);
  return result;
}

SceneOptions noisy_options() {
  SceneOptions options;
  options.preset = ScenePreset::UrbanStraight;
  options.seed = kSeed;
  options.frames = 300;
  options.noise.edge_jitter_px = 1.0;
  options.noise.edge_dropout = 0.1;
  options.noise.odometry_drift = 0.005;
  return options;
}

Outcome noisy_analogue(const fs::path& dir) {
  run_from_files(noisy_options(), dir);
  const ErrorReport r = evaluate(load_trajectory((dir / "est.txt").string()),
                                 load_trajectory((dir / "groundtruth.txt").string()));
  return {r.rmse_norm < 0.30 && r.rmse_angle_deg < 0.6 && r.drop_rate < 0.20,
          fmt("RMSE %.4f m (< 0.30), %.4f deg (< 0.6), drop rate %.1f%% (< 20%%)", r.rmse_norm, r.rmse_angle_deg,
              100.0 * r.drop_rate)};
}

Outcome occlusion_robustness(const fs::path& dir) {
  constexpr FrameId kFirst = 60, kLast = 69;
  SceneOptions options = noisy_options();
  options.frames = 120;
  options.noise.occluders.push_back(view_blocker(default_intrinsics(), kFirst, kLast));
  SyntheticScene scene = generate_scene(options);

  // Share of the landmarks in view whose every sample falls on the dynamic mask.
  double least_masked = 1.0;
  for (FrameId f = kFirst; f <= kLast; ++f) {
    const RenderedFrame frame = render_frame(scene, f);
    const Pose& gt = scene.pose(f);
    const LandmarkSamples samples = select_landmarks(scene.map, gt, scene.intrinsics);
    std::set<LandmarkId> seen, uncovered;
    for (const auto& label : samples.by_label) {
      for (const auto& s : label) {
        seen.insert(s.landmark);
        const Eigen::Vector2d uv = project(s.point, scene.intrinsics);
        if (!frame.dynamic(std::lround(uv.y()), std::lround(uv.x()))) uncovered.insert(s.landmark);
      }
    }
    least_masked = std::min(least_masked, 1.0 - double(uncovered.size()) / double(seen.size()));
  }

  const RunResult result = run_from_files(options, dir);
  bool occluded_dropped = true;
  double worst_accepted = 0.0;
  FrameId recovered = -1;
  for (const auto& rec : result.records) {
    const bool ok = rec.status == "accepted";
    if (rec.frame >= kFirst && rec.frame <= kLast && ok) occluded_dropped = false;
    if (ok) {
      worst_accepted =
          std::max(worst_accepted, (rec.result->pose.translation - scene.pose(rec.frame).translation).norm());
      if (rec.frame > kLast && recovered < 0) recovered = rec.frame;
    }
  }
  const bool recovered_in_time = recovered > 0 && recovered - kLast <= 3;
  return {least_masked > 0.8 && occluded_dropped && worst_accepted <= 0.5 && recovered_in_time,
          fmt("masked >= %.0f%% of landmarks (> 80%%), occluded frames %s, worst accepted error %.3f m (<= 0.5), "
              "recovered %lld frame(s) after (<= 3)",
              100.0 * least_masked, occluded_dropped ? "all dropped" : "NOT all dropped", worst_accepted,
              static_cast<long long>(recovered < 0 ? -1 : recovered - kLast))};
}

Outcome map_compaction(const fs::path& dir) {
  SceneOptions options;
  options.seed = kSeed;
  const SyntheticScene scene = generate_scene(options);
  fs::create_directories(dir);
  const fs::path file = dir / "trial1.cmap";
  save_map(scene.map, file.string());
  const std::size_t bytes = fs::file_size(file);
  constexpr std::size_t kOriginal = 220ull * 1024 * 1024;
  const MapStatistics s = map_statistics(load_map(file.string()), kOriginal);
  return {s.total == 419 && bytes < 30000 && s.compression_factor > 7000,
          fmt("%zu landmarks, %zu bytes (< 30 KB), compression factor %.0f (> 7000)", s.total, bytes,
              s.compression_factor)};
}

Outcome degenerate_gating(const fs::path& dir) {
  SceneOptions options;
  options.seed = kSeed;
  options.frames = 60;
  const auto single_line = [](SyntheticScene& scene) {
    CompactMap map;
    for (const auto& l : scene.map.labels()) map.add_label(l);
    map.add(LineSegmentLandmark{*map.find_label("lane_line"), {1.75, 0.0, 0.0}, {1.75, scene.road_length_m, 0.0}});
    scene.map = map;
  };
  const RunResult result = run_from_files(options, dir, single_line);
  std::size_t low_info = 0;
  for (const auto& r : result.records) low_info += r.status == "dropped:low-information";
  return {result.trajectory.empty() && low_info == result.records.size(),
          fmt("%zu of %zu frames rejected by the min-information gate, %zu poses emitted", low_info,
              result.records.size(), result.trajectory.size())};
}

Outcome determinism(const fs::path& first, const fs::path& dir) {
  run_from_files(noisy_options(), dir);
  const bool same_traj = read_file(first / "est.txt") == read_file(dir / "est.txt");
  const bool same_log = read_file(first / "log.jsonl") == read_file(dir / "log.jsonl");
  return {same_traj && same_log && !read_file(dir / "log.jsonl").empty(),
          fmt("trajectory %s, log %s", same_traj ? "identical" : "DIFFERS", same_log ? "identical" : "DIFFERS")};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "edgeloc-acceptance";
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "distance transform exactness", 10.0, distance_transform_exactness},
      {2, "jacobian correctness", 30.0, jacobian_correctness},
      {3, "noiseless closed loop", 60.0, noiseless_closed_loop},
      {4, "noisy analogue", 300.0, [&] { return noisy_analogue(work / "noisy"); }},
      {5, "occlusion robustness", 0.0, [&] { return occlusion_robustness(work / "occluded"); }},
      {6, "map compaction", 0.0, [&] { return map_compaction(work / "map"); }},
      {7, "degenerate scene gating", 0.0, [&] { return degenerate_gating(work / "single-line"); }},
      {8, "determinism", 0.0, [&] { return determinism(work / "noisy", work / "noisy-again"); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = fmt("%.1f s", secs);
    if (c.limit_s > 0) {
      timing += fmt(" (< %.0f s)", c.limit_s);
      if (secs >= c.limit_s) o.pass = false;
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %d %s: %s; %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                timing.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(work);
  std::printf("%d of 8 criteria passed\n", 8 - failed);
  return failed == 0 ? 0 : 1;
}
