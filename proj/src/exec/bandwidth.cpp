#include "sf/exec/bandwidth.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

namespace sf {

namespace {

std::int64_t sysfs_llc() {
  std::int64_t best = 0;
  for (int idx = 0; idx < 8; ++idx) {
    std::ifstream in("/sys/devices/system/cpu/cpu0/cache/index" + std::to_string(idx) + "/size");
    if (!in) continue;
    std::string s;
    in >> s;
    if (s.empty()) continue;
    std::int64_t v = std::atoll(s.c_str());
    const char suffix = s.back();
    if (suffix == 'K') v *= 1024;
    if (suffix == 'M') v *= 1024 * 1024;
    best = std::max(best, v);
  }
  return best;
}

// Kept as an explicit loop so the compiler does not turn it into memcpy.
__attribute__((noinline, optimize("no-tree-loop-distribute-patterns"))) void copy_loop(
    double* __restrict dst, const double* __restrict src, std::int64_t n) {
  for (std::int64_t i = 0; i < n; ++i) dst[i] = src[i];
}

struct FreeDel {
  void operator()(double* p) const { std::free(p); }
};

}  // namespace

std::int64_t llc_bytes() {
  long v = -1;
#ifdef _SC_LEVEL3_CACHE_SIZE
  v = sysconf(_SC_LEVEL3_CACHE_SIZE);
  if (v <= 0) v = sysconf(_SC_LEVEL2_CACHE_SIZE);
#endif
  if (v > 0) return v;
  const auto s = sysfs_llc();
  return s > 0 ? s : std::int64_t(32) << 20;
}

BandwidthProbe measure_bandwidth(std::int64_t bytes, int reps) {
  BandwidthProbe out;
  const std::int64_t n = std::max<std::int64_t>(bytes / 16, 1024);
  const std::size_t sz = (std::size_t(n) * sizeof(double) + 63) / 64 * 64;
  std::unique_ptr<double, FreeDel> a(static_cast<double*>(std::aligned_alloc(64, sz)));
  std::unique_ptr<double, FreeDel> b(static_cast<double*>(std::aligned_alloc(64, sz)));
  if (!a || !b) throw Error("memory", "cannot allocate bandwidth probe buffers");
  for (std::int64_t i = 0; i < n; ++i) a.get()[i] = double(i % 97);
  std::memset(b.get(), 0, sz);
  copy_loop(b.get(), a.get(), n);  // warmup, faults pages in
  for (int r = 0; r < std::max(reps, 1); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    copy_loop(b.get(), a.get(), n);
    const auto t1 = std::chrono::steady_clock::now();
    out.stats.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  out.bytes = 2 * n * std::int64_t(sizeof(double));
  const double m = out.stats.median();
  out.bytes_per_second = m > 0 ? double(out.bytes) / m : 0.0;
  return out;
}

}  // namespace sf
