#include "sf/exec/timing.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

namespace sf {

double TimingStats::median() const {
  if (samples.empty()) return 0.0;
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double TimingStats::min() const {
  return samples.empty() ? 0.0 : *std::min_element(samples.begin(), samples.end());
}

double TimingStats::max() const {
  return samples.empty() ? 0.0 : *std::max_element(samples.begin(), samples.end());
}

double KernelTimes::measured() const {
  double m = 0.0;
  for (const auto& i : instances) m = std::max(m, i.median());
  return m;
}

double KernelTimes::grouped() const {
  double s = 0.0;
  for (const auto& i : instances) s += i.median();
  return s;
}

const KernelTimes* BenchResult::find(const std::string& name) const {
  for (const auto& k : kernels)
    if (k.name == name) return &k;
  return nullptr;
}

BenchResult benchmark(const DataflowGraph& graph, const FieldSet& initial, int reps, int workers) {
  if (reps < 1) throw Error("config", "reps must be positive");
  Executor ex(graph, workers);
  FieldSet work = clone_fields(initial);
  ex.run(work);  // warmup, also compiles every node

  std::map<std::string, KernelTimes> by_name;
  BenchResult out;
  out.reps = reps;
  for (int r = 0; r < reps; ++r) {
    restore_fields(initial, work);
    std::vector<NodeTiming> t;
    const auto t0 = std::chrono::steady_clock::now();
    ex.run(work, &t);
    const auto t1 = std::chrono::steady_clock::now();
    out.total.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    std::map<std::string, int> slot;
    for (const auto& e : t) {
      auto& k = by_name[e.name];
      k.name = e.name;
      const int i = slot[e.name]++;
      if (int(k.instances.size()) <= i) k.instances.resize(std::size_t(i) + 1);
      k.instances[std::size_t(i)].samples.push_back(e.seconds);
      k.all.samples.push_back(e.seconds);
    }
    for (const auto& [name, n] : slot) by_name[name].invocations = n;
  }
  for (auto& [name, k] : by_name) out.kernels.push_back(std::move(k));
  return out;
}

std::string timings_csv(const BenchResult& result) {
  std::ostringstream os;
  os.precision(9);
  os << "kernel,invocations,median_s,min_s\n";
  for (const auto& k : result.kernels)
    os << k.name << "," << k.invocations << "," << k.all.median() << "," << k.all.min() << "\n";
  return os.str();
}

std::string timings_raw(const BenchResult& result) {
  std::ostringstream os;
  os.precision(9);
  os << "kernel,instance,rep,seconds\n";
  for (const auto& k : result.kernels)
    for (std::size_t i = 0; i < k.instances.size(); ++i)
      for (std::size_t r = 0; r < k.instances[i].samples.size(); ++r)
        os << k.name << "," << i << "," << r << "," << k.instances[i].samples[r] << "\n";
  return os.str();
}

BenchResult parse_timings_raw(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "kernel,instance,rep,seconds")
    throw Error("format error", "timings file does not start with 'kernel,instance,rep,seconds'");
  std::map<std::string, std::map<int, std::map<int, double>>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
    if (cols.size() != 4) throw Error("format error", "timings line " + std::to_string(lineno) + " needs 4 columns");
    try {
      rows[cols[0]][std::stoi(cols[1])][std::stoi(cols[2])] = std::stod(cols[3]);
    } catch (const std::exception&) {
      throw Error("format error", "timings line " + std::to_string(lineno) + " is not numeric");
    }
  }
  BenchResult res;
  std::map<int, double> total;
  for (const auto& [name, instances] : rows) {
    KernelTimes k;
    k.name = name;
    for (const auto& [idx, reps] : instances) {
      if (idx != int(k.instances.size())) throw Error("format error", "instances of '" + name + "' are not contiguous");
      TimingStats t;
      for (const auto& [rep, v] : reps) {
        t.samples.push_back(v);
        k.all.samples.push_back(v);
        total[rep] += v;
        res.reps = std::max(res.reps, rep + 1);
      }
      k.instances.push_back(std::move(t));
    }
    k.invocations = int(k.instances.size());
    res.kernels.push_back(std::move(k));
  }
  for (const auto& [rep, v] : total) res.total.samples.push_back(v);
  return res;
}

}  // namespace sf
