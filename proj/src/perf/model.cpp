#include "sf/perf/model.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>

namespace sf {

std::int64_t unique_bytes(const DataflowGraph& g, const StencilNode& node) {
  std::int64_t total = 0;
  for (const auto& [name, mv] : query_movement(g, node)) total += mv.read_bytes + mv.write_bytes;
  return total;
}

double model_kernel(const DataflowGraph& g, const StencilNode& node, double bandwidth) {
  if (!(bandwidth > 0)) throw Error("model", "bandwidth must be positive");
  return double(unique_bytes(g, node)) / bandwidth;
}

double model_graph(const DataflowGraph& g, double bandwidth) {
  std::map<std::pair<int, int>, double> memo;
  double total = 0.0;
  for (const auto& e : unrolled_trace(g)) {
    auto it = memo.find({e.state, e.node});
    if (it == memo.end())
      it = memo.emplace(std::make_pair(e.state, e.node),
                        model_kernel(g, g.states[std::size_t(e.state)].nodes[std::size_t(e.node)], bandwidth))
               .first;
    total += it->second;
  }
  return total;
}

PerfReport build_report(const DataflowGraph& g, const BenchResult& timings, double bandwidth) {
  if (!(bandwidth > 0)) throw Error("model", "bandwidth must be positive");
  PerfReport rep;
  rep.bandwidth = bandwidth;
  std::map<std::string, KernelBound> by_name;
  std::vector<std::string> order;
  for (const auto& e : unrolled_trace(g)) {
    const auto& node = g.states[std::size_t(e.state)].nodes[std::size_t(e.node)];
    auto [it, fresh] = by_name.try_emplace(node.name);
    KernelBound& k = it->second;
    if (fresh) {
      k.kernel = node.name;
      order.push_back(node.name);
    }
    ++k.invocations;
    k.unique_bytes = std::max(k.unique_bytes, unique_bytes(g, node));
  }
  for (auto& [name, k] : by_name) {
    k.bound_s = double(k.unique_bytes) / bandwidth;
    const KernelTimes* t = timings.find(name);
    if (!t || t->instances.empty()) {
      k.flags = "no-timing";
      continue;
    }
    k.measured_s = t->measured();
    k.grouped_s = t->grouped();
    k.utilization = *k.measured_s > 0 ? k.bound_s / *k.measured_s : 0.0;
    if (k.utilization > kCacheResidentUtilization) k.flags = "cache-resident";
  }
  for (const auto& n : order) rep.entries.push_back(by_name.at(n));
  std::stable_sort(rep.entries.begin(), rep.entries.end(), [](const KernelBound& a, const KernelBound& b) {
    if (a.grouped_s != b.grouped_s) return a.grouped_s > b.grouped_s;
    return a.kernel < b.kernel;
  });
  return rep;
}

std::vector<std::string> hotspot_list(const PerfReport& rep, std::size_t top_n) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& k : rep.entries)
    scored.emplace_back(k.grouped_s * (1.0 - std::min(k.utilization, 1.0)), k.kernel);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scored.size() && i < top_n; ++i) out.push_back(scored[i].second);
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string report_csv(const PerfReport& rep) {
  std::ostringstream os;
  os << "kernel,invocations,measured_s,bound_s,utilization,flags\n";
  for (const auto& k : rep.entries)
    os << k.kernel << "," << k.invocations << "," << (k.measured_s ? num(*k.measured_s) : "") << ","
       << num(k.bound_s) << "," << (k.measured_s ? num(k.utilization) : "") << "," << k.flags << "\n";
  return os.str();
}

std::string report_table(const PerfReport& rep) {
  std::size_t w = 6;
  for (const auto& k : rep.entries) w = std::max(w, k.kernel.size());
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-*s %5s %12s %12s %8s  %s\n", int(w), "kernel", "inv", "measured_us",
                "bound_us", "util%", "flags");
  os << line;
  for (const auto& k : rep.entries) {
    if (k.measured_s)
      std::snprintf(line, sizeof line, "%-*s %5d %12.2f %12.2f %8.2f  %s\n", int(w), k.kernel.c_str(),
                    k.invocations, *k.measured_s * 1e6, k.bound_s * 1e6, k.utilization * 100,
                    k.flags.c_str());
    else
      std::snprintf(line, sizeof line, "%-*s %5d %12s %12.2f %8s  %s\n", int(w), k.kernel.c_str(),
                    k.invocations, "-", k.bound_s * 1e6, "-", k.flags.c_str());
    os << line;
  }
  std::snprintf(line, sizeof line, "bandwidth %.3f GB/s\n", rep.bandwidth / 1e9);
  os << line;
  return os.str();
}

nlohmann::json report_json(const PerfReport& rep) {
  nlohmann::json j;
  j["bandwidth_bytes_per_s"] = rep.bandwidth;
  j["kernels"] = nlohmann::json::array();
  for (const auto& k : rep.entries) {
    nlohmann::json e;
    e["kernel"] = k.kernel;
    e["invocations"] = k.invocations;
    e["unique_bytes"] = k.unique_bytes;
    e["bound_s"] = k.bound_s;
    e["measured_s"] = k.measured_s ? nlohmann::json(*k.measured_s) : nlohmann::json(nullptr);
    e["grouped_s"] = k.grouped_s;
    e["utilization"] = k.utilization;
    e["flags"] = k.flags;
    j["kernels"].push_back(e);
  }
  j["hotspots"] = hotspot_list(rep, rep.entries.size());
  return j;
}

}  // namespace sf
