#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>

#include "edgeloc/compact_map.hpp"
#include "edgeloc/random.hpp"
#include "edgeloc/synthetic.hpp"

using namespace edgeloc;

namespace {

CompactMap two_label_map() {
  CompactMap m;
  m.add_label({"lane_line", LabelCategory::Road, false});
  m.add_label({"traffic_sign", LabelCategory::NonRoad, false});
  return m;
}

WireframeLandmark sign(LabelId label, double x) {
  return {label, {{x, 10, 5}, {x + 1.5, 10, 5}, {x + 1.5, 10, 6}, {x, 10, 6}}};
}

std::size_t error_line(std::string_view text) {
  try {
    parse_map(text);
  } catch (const MapParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(ParseMap, OneSegment) {
  const CompactMap m = parse_map("CMAP 1\nLABEL lane_line road\nSEG lane_line 0 0 0 3 0 0\n");
  ASSERT_EQ(m.size(), 1u);
  const auto& seg = std::get<LineSegmentLandmark>(m.landmarks()[0]);
  EXPECT_EQ(seg.p1, Eigen::Vector3d(3, 0, 0));
  EXPECT_FALSE(seg.pole_radius);
  EXPECT_EQ(m.label(0).category, LabelCategory::Road);
}

TEST(ParseMap, FourPointWireframe) {
  const CompactMap m =
      parse_map("CMAP 1\nLABEL traffic_sign nonroad\nWF traffic_sign 4 0 10 5 1.5 10 5 1.5 10 6 0 10 6\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(std::get<WireframeLandmark>(m.landmarks()[0]).points.size(), 4u);
}

TEST(ParseMap, CommentsBlankLinesAndPoleRadius) {
  const CompactMap m = parse_map(
      "# compact map\n\nCMAP 1   # header\nLABEL lamp_pole nonroad pole\n"
      "SEG lamp_pole 7 20 0 7 20 8 radius=0.18\n\n");
  ASSERT_EQ(m.size(), 1u);
  EXPECT_TRUE(m.label(0).pole);
  EXPECT_DOUBLE_EQ(*std::get<LineSegmentLandmark>(m.landmarks()[0]).pole_radius, 0.18);
}

TEST(ParseMap, TwoPointWireframeIsInvariantViolation) {
  try {
    parse_map("CMAP 1\nLABEL sign nonroad\nSEG sign 0 0 0 1 0 0\nWF sign 2 0 0 0 1 0 0\n");
    FAIL() << "expected MapInvariantError";
  } catch (const MapInvariantError& e) {
    EXPECT_EQ(e.landmark(), 1u);
  }
}

TEST(ParseMap, SyntaxErrorsReportTheLine) {
  EXPECT_EQ(error_line("LABEL a road\n"), 1u);
  EXPECT_EQ(error_line("CMAP 2\n"), 1u);
  EXPECT_EQ(error_line(""), 1u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nSEG a 0 0 0 1 0 x\n"), 3u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nSEG a 0 0 0 1 0\n"), 3u);
  EXPECT_EQ(error_line("CMAP 1\nSEG a 0 0 0 1 0 0\n"), 2u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nWF a 3 0 0 0 1 0 0\n"), 3u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nBOX a\n"), 3u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nLABEL a road\n"), 3u);
  EXPECT_EQ(error_line("CMAP 1\nLABEL a road\nSEG a 0 0 0 1 0 0 r=1\n"), 3u);
}

TEST(ParseMap, UnknownCategory) {
  EXPECT_EQ(error_line("CMAP 1\nLABEL a sidewalk\n"), 2u);
}

TEST(Invariants, Violations) {
  CompactMap m = two_label_map();
  EXPECT_THROW(m.add(LineSegmentLandmark{0, {0, 0, 0}, {0.005, 0, 0}}), MapInvariantError);
  EXPECT_THROW(m.add(LineSegmentLandmark{7, {0, 0, 0}, {1, 0, 0}}), MapInvariantError);
  EXPECT_THROW(m.add(LineSegmentLandmark{0, {0, 0, 0}, {1, 0, 0}, -0.1}), MapInvariantError);
  EXPECT_THROW(m.add(LineSegmentLandmark{0, {0, 0, NAN}, {1, 0, 0}}), MapInvariantError);
  EXPECT_THROW(m.add(WireframeLandmark{1, {{0, 0, 0}, {0.001, 0, 0}, {1, 1, 0}}}), MapInvariantError);
  // One corner 0.4 m off the plane of the other three.
  EXPECT_THROW(m.add(WireframeLandmark{1, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0.4}, {0, 1, 0}}}), MapInvariantError);
  EXPECT_NO_THROW(m.add(WireframeLandmark{1, {{0, 0, 0}, {1, 0, 0}, {1, 1, 0.02}, {0, 1, 0}}}));
  EXPECT_THROW(m.add_label({"", LabelCategory::Road, false}), std::invalid_argument);
  EXPECT_THROW(m.add_label({"lane_line", LabelCategory::Road, false}), std::invalid_argument);
}

TEST(Planarity, MatchesKnownOffset) {
  // Symmetric lift of two opposite corners by h gives a deviation of h/2.
  const std::vector<Eigen::Vector3d> pts{{0, 0, 0.1}, {1, 0, 0}, {1, 1, 0.1}, {0, 1, 0}};
  EXPECT_NEAR(planarity_deviation(pts), 0.05, 1e-12);
}

TEST(Serialize, EmptyMapIsHeaderOnly) { EXPECT_EQ(serialize_map(CompactMap{}), "CMAP 1\n"); }

TEST(Serialize, RoundTripIsIdentical) {
  CompactMap m = two_label_map();
  m.add(LineSegmentLandmark{0, {0.1, 0.2, 0.3}, {1.0 / 3.0, 2, -1e-7}});
  m.add(sign(1, 4.0));
  const CompactMap back = parse_map(serialize_map(m));
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_map(back), serialize_map(m));
}

TEST(Serialize, SyntheticTrialMapRoundTrip) {
  SceneOptions o;
  o.seed = 1;
  o.frames = 10;
  const CompactMap m = generate_scene(o).map;
  ASSERT_EQ(m.size(), 419u);
  const std::string text = serialize_map(m);
  EXPECT_LT(text.size(), 30000u);
  const CompactMap back = parse_map(text);
  EXPECT_EQ(back, m);
  EXPECT_EQ(serialize_map(back), text);
}

TEST(Serialize, SizeGrowsLinearly) {
  // Each record adds exactly its own line.
  CompactMap m = two_label_map();
  const std::size_t header = serialize_map(m).size();
  std::size_t previous = header;
  for (int i = 0; i < 50; ++i) {
    CompactMap alone = two_label_map();
    alone.add(sign(1, 4.0 * i));
    m.add(sign(1, 4.0 * i));
    const std::size_t size = serialize_map(m).size();
    EXPECT_EQ(size - previous, serialize_map(alone).size() - header);
    previous = size;
  }
}

TEST(Statistics, EmptyMap) {
  const MapStatistics s = map_statistics(two_label_map(), 1'000'000);
  EXPECT_EQ(s.total, 0u);
  for (const auto& [name, n] : s.per_label) EXPECT_EQ(n, 0u);
  EXPECT_EQ(s.compact_bytes, serialize_map(two_label_map()).size());
}

TEST(Statistics, PaperCompressionFactor) {
  // 220 MB original over a 25.2 KB map.
  EXPECT_NEAR(compression_factor(220.0 * 1024 * 1024, 25.2 * 1024), 8.9e3, 0.05e3);
  EXPECT_THROW(compression_factor(0, 1), std::invalid_argument);
  EXPECT_THROW(map_statistics(two_label_map(), 0), std::invalid_argument);
}

TEST(Statistics, CornerPresetCountsMatchGenerator) {
  SceneOptions o;
  o.preset = ScenePreset::UrbanCorner;
  o.seed = 3;
  o.frames = 10;
  const SyntheticScene scene = generate_scene(o);
  const MapStatistics s = map_statistics(scene.map, 1);
  ASSERT_EQ(s.total, 144u);
  const LandmarkCounts c = preset_counts(ScenePreset::UrbanCorner);
  const std::vector<std::size_t> want{c.lane_line, c.lamp_pole, c.building_edge, c.rectangle_mark, c.traffic_sign};
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(s.per_label[i].second, want[i]) << s.per_label[i].first;
}

TEST(Statistics, CountsIgnoreRecordOrder) {
  SceneOptions o;
  o.preset = ScenePreset::Sparse;
  o.frames = 10;
  const CompactMap m = generate_scene(o).map;
  std::vector<std::size_t> order(m.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  CounterRng rng(5, 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.next_u64() % i]);
  CompactMap shuffled;
  for (const auto& l : m.labels()) shuffled.add_label(l);
  for (std::size_t i : order) shuffled.add(m.landmarks()[i]);
  const MapStatistics a = map_statistics(m, 1000), b = map_statistics(shuffled, 1000);
  EXPECT_EQ(a.per_label, b.per_label);
  EXPECT_EQ(a.segments, b.segments);
  EXPECT_EQ(a.wireframes, b.wireframes);
  EXPECT_EQ(a.compact_bytes, b.compact_bytes);
}

TEST(Files, SaveLoadAndMissingPath) {
  CompactMap m = two_label_map();
  m.add(sign(1, 0.0));
  const auto path = std::filesystem::temp_directory_path() / "edgeloc_test_map.cmap";
  save_map(m, path.string());
  EXPECT_EQ(load_map(path.string()), m);
  std::filesystem::remove(path);
  try {
    load_map("/nonexistent/dir/map.cmap");
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/map.cmap"), std::string::npos);
  }
}
