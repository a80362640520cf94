#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgeloc/alignment.hpp"
#include "edgeloc/compact_map.hpp"
#include "edgeloc/edge_features.hpp"
#include "edgeloc/landmark_selection.hpp"

namespace edgeloc {

struct Config {
  SelectionConfig selection;
  AlignmentConfig alignment;
  double dt_truncation_px = kDefaultTruncationPx;
  int boundary_margin_px = kDefaultBoundaryMarginPx;
  /// Label name to weight; resolved against a map with resolve_label_weights().
  std::vector<std::pair<std::string, double>> label_weights;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Sets one `key = value` option; throws ConfigError on unknown keys or bad
/// values.
void apply_setting(Config& config, std::string_view key, std::string_view value);

/// Flat `key = value` lines with '#' comments, applied on top of `base`.
Config parse_config(std::string_view text, Config base = {});
Config load_config(const std::string& path, Config base = {});

/// Accepts `key=value`.
void apply_override(Config& config, std::string_view assignment);

/// Fills config.alignment.label_weights for the labels of `map`. Throws
/// ConfigError for names the map does not define.
void resolve_label_weights(Config& config, const CompactMap& map);

/// Splits and trims a `key = value` line; nothing for blank/comment lines.
std::optional<std::pair<std::string, std::string>> split_assignment(std::string_view line);

}  // namespace edgeloc
