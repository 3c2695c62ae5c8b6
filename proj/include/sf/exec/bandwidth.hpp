#pragma once

#include <cstdint>

#include "sf/exec/timing.hpp"

namespace sf {

/// Last-level cache size in bytes (sysconf, then sysfs, else 32 MiB).
std::int64_t llc_bytes();

struct BandwidthProbe {
  double bytes_per_second = 0.0;  // (read + write bytes) / median time
  std::int64_t bytes = 0;         // both buffers together
  TimingStats stats;
};

/// Sustained copy bandwidth over two buffers totalling `bytes`. The plain
/// copy loop is kept as a loop (no library memcpy).
BandwidthProbe measure_bandwidth(std::int64_t bytes, int reps = 10);

}  // namespace sf
