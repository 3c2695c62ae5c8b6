#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sf/exec/timing.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

/// Read + write bytes of a node with every element counted once per memlet
/// direction. Cached containers are not materialized and count zero.
std::int64_t unique_bytes(const DataflowGraph& graph, const StencilNode& node);

/// Lower-bound time of one invocation: unique_bytes / bandwidth.
double model_kernel(const DataflowGraph& graph, const StencilNode& node, double bandwidth);

/// Sum of bound times over the unrolled trace.
double model_graph(const DataflowGraph& graph, double bandwidth);

struct KernelBound {
  std::string kernel;
  int invocations = 0;
  std::int64_t unique_bytes = 0;  // largest over the kernel's nodes
  double bound_s = 0.0;
  std::optional<double> measured_s;  // max over per-instance medians
  double grouped_s = 0.0;            // summed runtime of all invocations
  double utilization = 0.0;
  std::string flags;
};

struct PerfReport {
  double bandwidth = 0.0;
  std::vector<KernelBound> entries;  // ranking order
};

/// Per-kernel bounds joined with measurements, ranked by grouped runtime
/// (descending, then name).
PerfReport build_report(const DataflowGraph& graph, const BenchResult& timings, double bandwidth);

/// Kernels ordered by grouped runtime * (1 - utilization).
std::vector<std::string> hotspot_list(const PerfReport& report, std::size_t top_n);

/// `kernel,invocations,measured_s,bound_s,utilization,flags`
std::string report_csv(const PerfReport& report);
std::string report_table(const PerfReport& report);
nlohmann::json report_json(const PerfReport& report);

/// Utilization above this is outside the modeled regime.
inline constexpr double kCacheResidentUtilization = 1.05;

}  // namespace sf
