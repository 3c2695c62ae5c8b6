#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sf/tune/cutout.hpp"
#include "sf/xform/transforms.hpp"

namespace sf {

struct TunerOptions {
  int depth = 2;           // transformations per configuration
  int l_max = 4;           // cutout length
  int m = 2;               // configurations kept per cutout
  double gain = 0.02;      // minimum relative improvement for a pattern
  double noise_margin = 0.02;
  int reps = 10;
  int workers = 1;
  std::uint64_t seed = 1;
  bool model_cost = false;     // cost = modeled bound time instead of wall clock
  double bandwidth = 10e9;     // used by model-cost mode
};

/// One point of a cutout's configuration space.
struct TuningConfig {
  std::vector<Transformation> transformations;
  std::vector<int> k_outer;  // nodes (after the transformations) scheduled K-outermost
  double cost = 0.0;
  bool reassociates = false;

  std::string id() const;
  nlohmann::json to_json() const;
};

/// Applies a configuration to a copy of `graph` (single state 0).
DataflowGraph replay(const DataflowGraph& graph, const TuningConfig& config);

/// Schedule with K outermost ([K, Interval, Operation, J, I]); nullopt when
/// invalid or identical in effect to the current one.
std::optional<Schedule> k_outer_schedule(const StencilNode& node, const DataflowGraph& graph);

/// Measures a graph: median total time over `reps`, or the modeled time.
double graph_cost(const DataflowGraph& graph, const TunerOptions& opts);

using TuneLog = std::function<void(const nlohmann::json&)>;

struct CutoutResult {
  std::string cutout;
  std::vector<std::string> names;
  std::vector<TuningConfig> ranked;  // ascending cost, baseline included
  double baseline = 0.0;
  std::size_t space = 0;     // size of the configuration space
  std::size_t evaluated = 0;
  std::size_t rejected = 0;
};

/// Exhaustive search over the configurations of a standalone cutout graph.
CutoutResult tune_cutout(const DataflowGraph& cutout, const TunerOptions& opts, const TuneLog& log = {});

struct PatternStep {
  XKind kind = XKind::PowerRewrite;
  int offset = -1;  // node offset from the first matched node
  std::string field;
};

/// Location-free abstraction of a winning configuration.
struct Pattern {
  std::vector<std::string> names;  // consecutive node names to match
  std::vector<PatternStep> steps;
  std::vector<int> k_outer;
  double source_gain = 0.0;

  std::string id() const;
};

nlohmann::json patterns_to_json(const std::vector<Pattern>& patterns, const TunerOptions& opts);
std::vector<Pattern> patterns_from_json(const nlohmann::json& j);

/// Top-M configurations beating the baseline by at least opts.gain.
std::vector<Pattern> extract_patterns(const CutoutResult& result, const TunerOptions& opts);

/// Merges duplicates keeping the largest gain; sorted by descending gain, then id.
std::vector<Pattern> merge_patterns(std::vector<Pattern> patterns);

struct Phase1Result {
  std::vector<CutoutResult> cutouts;
  std::vector<Pattern> patterns;
  std::size_t evaluated = 0;
};

/// Tunes every cutout of `module` and collects patterns.
Phase1Result tune_module(const DataflowGraph& module, const TunerOptions& opts, const TuneLog& log = {});

struct AppliedPattern {
  std::string pattern;
  int state = 0;
  int first = 0;
  double before = 0.0;
  double after = 0.0;
  bool accepted = false;
  std::string reason;
};

struct TransferResult {
  DataflowGraph graph;
  std::vector<AppliedPattern> attempts;
  std::size_t matches = 0;
  std::size_t applied = 0;
  std::size_t evaluated = 0;  // configurations timed during transfer
};

TransferResult transfer(const std::vector<Pattern>& patterns, const DataflowGraph& target,
                        const TunerOptions& opts, const TuneLog& log = {});

/// Size of the exhaustive space over a whole graph: transformation subsets of
/// size <= depth times the per-node schedule menu product (saturates).
double exhaustive_space(const DataflowGraph& graph, int depth);

}  // namespace sf
