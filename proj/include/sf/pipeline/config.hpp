#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sf/common.hpp"
#include "sf/tune/tuner.hpp"

namespace sf {

inline constexpr Domain kDefaultDomain{192, 192, 80};
inline constexpr Domain kFallbackDomain{64, 64, 32};

/// Settings shared by every CLI command.
struct PipelineConfig {
  static constexpr int kVersion = 1;

  Domain domain = kDefaultDomain;
  int workers = 1;
  int alignment = 8;  // elements
  std::vector<int> tiles{0, 4, 8, 32};
  int m = 2;
  double gain = 0.02;
  int l_max = 4;
  int depth = 2;
  int reps = 10;
  std::uint64_t seed = 1;
  double noise_margin = 0.02;
  bool model_cost = false;
  double bandwidth = 0.0;  // bytes/s; 0 = measure with the copy probe
  std::string tuning_module = "transport";
};

/// Parses `key = value` lines; '#' starts a comment. Values are numbers,
/// booleans, quoted strings or bracketed lists. Throws Error with the line.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::string& path);

/// Sets one key from its textual value (same syntax as the file).
void apply_setting(PipelineConfig& cfg, const std::string& key, const std::string& value, SourceLoc loc = {});
/// Applies a `key=value` override.
void apply_override(PipelineConfig& cfg, const std::string& assignment);

/// Throws Error("config", ...) when a numeric setting is out of range.
void check_config(const PipelineConfig& cfg);

nlohmann::json config_to_json(const PipelineConfig& cfg);
/// Canonical config file text; parse_config(config_text(c)) == c.
std::string config_text(const PipelineConfig& cfg);

TunerOptions tuner_options(const PipelineConfig& cfg, double bandwidth);

}  // namespace sf
