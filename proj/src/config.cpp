#include "edgeloc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace edgeloc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError("bad number for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

double positive(std::string_view key, std::string_view value) {
  const double v = to_double(key, value);
  if (!(v > 0)) throw ConfigError(std::string(key) + " must be positive");
  return v;
}

double non_negative(std::string_view key, std::string_view value) {
  const double v = to_double(key, value);
  if (v < 0) throw ConfigError(std::string(key) + " must not be negative");
  return v;
}

long long to_integer(std::string_view key, std::string_view value, long long min) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out < min) {
    throw ConfigError("bad integer for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return out;
}

std::vector<std::pair<std::string, double>> parse_weights(std::string_view value) {
  std::vector<std::pair<std::string, double>> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    const std::string_view item = trim(value.substr(pos, comma == std::string_view::npos ? value.npos : comma - pos));
    if (!item.empty()) {
      const auto colon = item.find(':');
      if (colon == std::string_view::npos) throw ConfigError("label_weights entry needs name:weight");
      const std::string name(trim(item.substr(0, colon)));
      if (name.empty()) throw ConfigError("label_weights entry has no name");
      out.emplace_back(name, non_negative("label_weights", trim(item.substr(colon + 1))));
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

using Setter = std::function<void(Config&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"sample_spacing_px", [](Config& c, auto k, auto v) { c.selection.sample_spacing_px = positive(k, v); }},
      {"depth_tolerance_m", [](Config& c, auto k, auto v) { c.selection.depth_tolerance_m = non_negative(k, v); }},
      {"default_pole_radius_m",
       [](Config& c, auto k, auto v) { c.selection.default_pole_radius_m = non_negative(k, v); }},
      {"max_selection_range_m",
       [](Config& c, auto k, auto v) { c.selection.max_selection_range_m = positive(k, v); }},
      {"dt_truncation_px", [](Config& c, auto k, auto v) { c.dt_truncation_px = positive(k, v); }},
      {"boundary_margin_px",
       [](Config& c, auto k, auto v) { c.boundary_margin_px = static_cast<int>(to_integer(k, v, 0)); }},
      {"label_weights", [](Config& c, auto, auto v) { c.label_weights = parse_weights(v); }},
      {"max_iterations",
       [](Config& c, auto k, auto v) { c.alignment.max_iterations = static_cast<int>(to_integer(k, v, 1)); }},
      {"min_samples",
       [](Config& c, auto k, auto v) { c.alignment.min_samples = static_cast<std::size_t>(to_integer(k, v, 1)); }},
      {"step_tol", [](Config& c, auto k, auto v) { c.alignment.step_tol = non_negative(k, v); }},
      {"energy_tol", [](Config& c, auto k, auto v) { c.alignment.energy_tol = non_negative(k, v); }},
      {"lambda_init", [](Config& c, auto k, auto v) { c.alignment.lambda_init = non_negative(k, v); }},
      {"max_translation_jump_m",
       [](Config& c, auto k, auto v) { c.alignment.max_translation_jump_m = positive(k, v); }},
      {"max_rotation_jump_deg", [](Config& c, auto k, auto v) { c.alignment.max_rotation_jump_deg = positive(k, v); }},
      {"max_mean_reproj_px", [](Config& c, auto k, auto v) { c.alignment.max_mean_reproj_px = positive(k, v); }},
      {"min_information", [](Config& c, auto k, auto v) { c.alignment.min_information = non_negative(k, v); }},
  };
  return table;
}

}  // namespace

std::optional<std::pair<std::string, std::string>> split_assignment(std::string_view line) {
  if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
  line = trim(line);
  if (line.empty()) return std::nullopt;
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) throw ConfigError("expected key = value: '" + std::string(line) + "'");
  const std::string_view key = trim(line.substr(0, eq));
  if (key.empty()) throw ConfigError("empty key: '" + std::string(line) + "'");
  return std::pair{std::string(key), std::string(trim(line.substr(eq + 1)))};
}

void apply_setting(Config& config, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown config key: " + std::string(key));
  it->second(config, key, value);
}

Config parse_config(std::string_view text, Config base) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (const auto kv = split_assignment(line)) apply_setting(base, kv->first, kv->second);
  }
  return base;
}

Config load_config(const std::string& path, Config base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_override(Config& config, std::string_view assignment) {
  const auto kv = split_assignment(assignment);
  if (!kv) throw ConfigError("empty override");
  apply_setting(config, kv->first, kv->second);
}

void resolve_label_weights(Config& config, const CompactMap& map) {
  config.alignment.label_weights.assign(map.labels().size(), 1.0);
  for (const auto& [name, w] : config.label_weights) {
    const auto id = map.find_label(name);
    if (!id) throw ConfigError("label_weights names unknown label: " + name);
    config.alignment.label_weights[*id] = w;
  }
}

}  // namespace edgeloc
