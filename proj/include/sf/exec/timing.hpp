#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sf/exec/scheduled.hpp"

namespace sf {

struct TimingStats {
  std::vector<double> samples;

  double median() const;
  double min() const;
  double max() const;
  int reps() const { return int(samples.size()); }
};

/// Timings of one kernel (node name) across a benchmark.
struct KernelTimes {
  std::string name;
  int invocations = 0;                         // per run of the trace
  std::vector<TimingStats> instances;          // per invocation slot, one sample per rep
  TimingStats all;                             // every invocation sample

  /// Largest per-instance median (the "maximal reported runtime").
  double measured() const;
  /// Sum of per-instance medians: runtime of this kernel type in one run.
  double grouped() const;
};

struct BenchResult {
  int reps = 0;
  std::vector<KernelTimes> kernels;  // sorted by name
  TimingStats total;                 // whole trace per rep

  const KernelTimes* find(const std::string& name) const;
};

/// Runs the trace once for warmup, then `reps` timed times. Fields are
/// restored from `initial` before each run so values do not drift.
BenchResult benchmark(const DataflowGraph& graph, const FieldSet& initial, int reps, int workers = 1);

/// CSV with header `kernel,invocations,median_s,min_s`.
std::string timings_csv(const BenchResult& result);

/// Raw samples, one line per (kernel, instance, rep).
std::string timings_raw(const BenchResult& result);

/// Inverse of timings_raw. The total is rebuilt as the per-rep sum.
BenchResult parse_timings_raw(const std::string& text);

}  // namespace sf
