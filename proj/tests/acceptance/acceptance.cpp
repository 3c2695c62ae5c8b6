// Acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only 3   run one (repeatable)
#include <algorithm>
#include <cstdarg>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sf/exec/bandwidth.hpp"
#include "sf/exec/reference.hpp"
#include "sf/exec/timing.hpp"
#include "sf/ir/expand.hpp"
#include "sf/perf/model.hpp"
#include "sf/pipeline/corpus.hpp"
#include "sf/pipeline/io.hpp"
#include "sf/sched/validity.hpp"
#include "sf/tune/tuner.hpp"
#include "sf/xform/transforms.hpp"

using namespace sf;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds of the criteria.
constexpr double kReassocRel = 1e-12;          // 1: PowerRewrite involved
constexpr int kMinOracleCases = 1000;          // 1
constexpr double kOracleBudgetS = 15 * 60;     // 1
constexpr double kBandwidthFloor = 0.70;       // 3
constexpr double kPowerTimeRatio = 0.85;       // 4
constexpr double kTransferSpaceRatio = 0.05;   // 6
constexpr double kTransferQuality = 0.95;      // 6
constexpr double kTransferBudgetS = 30 * 60;   // 6
constexpr double kScheduleGain = 1.3;          // 7
constexpr int kReps = 10;

const Domain kSmall{16, 16, 8};
const Domain kLarge{192, 192, 80};
const Domain kTune{64, 64, 32};

const std::vector<std::string> kPrograms{"copy", "smagorinsky", "tridiagonal", "transport", "corners"};

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

DenseSet reference_outputs(const DataflowGraph& g, std::uint64_t seed) {
  const RefProgram prog = reference_program(g);
  DenseSet d = reference_inputs(prog, seed);
  run_reference(prog, d);
  return d;
}

Comparison run_and_compare(const DenseSet& expected, const DataflowGraph& g, std::uint64_t seed, int workers) {
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, seed);
  Executor ex(g, workers);
  ex.run(f);
  return compare(expected, f, g);
}

BenchResult bench(const DataflowGraph& g, int reps = kReps) {
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  return benchmark(g, f, reps, 1);
}

double kernel_median(const BenchResult& r, const std::string& name) {
  const KernelTimes* k = r.find(name);
  if (!k) throw std::runtime_error("no timing for " + name);
  return k->measured();
}

std::optional<Transformation> find_kind(const DataflowGraph& g, XKind kind) {
  for (const auto& t : list_applicable(g))
    if (t.kind == kind) return t;
  return std::nullopt;
}

// 1. Scheduled execution equals the reference interpreter.
Outcome oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240501);
  int cases = 0, failures = 0, reassoc_cases = 0;
  double worst_rel = 0.0;
  std::string first_failure;

  auto check = [&](const std::string& what, const DenseSet& expected, const DataflowGraph& g, bool reassoc,
                   int workers) {
    Comparison c;
    try {
      c = run_and_compare(expected, g, 1, workers);
    } catch (const std::exception& e) {
      c.bitwise = false;
      c.max_rel = INFINITY;
      c.worst = std::string("exception: ") + e.what();
    }
    ++cases;
    reassoc_cases += reassoc ? 1 : 0;
    const bool ok = c.bitwise || (reassoc && c.max_rel <= kReassocRel);
    if (reassoc) worst_rel = std::max(worst_rel, c.max_rel);
    if (!ok && failures++ == 0) first_failure = what + fmt(" (max_rel %.3g in %s)", c.max_rel, c.worst.c_str());
  };

  for (const auto& name : kPrograms) {
    const DataflowGraph g0 = compile_corpus(name, kSmall);
    const DenseSet expected = reference_outputs(g0, 1);

    // Every enumerated schedule of every node, alternating 1 and 4 workers.
    for (std::size_t s = 0; s < g0.states.size(); ++s)
      for (std::size_t n = 0; n < g0.states[s].nodes.size(); ++n) {
        const auto schedules = enumerate_schedules(g0.states[s].nodes[n], g0);
        for (std::size_t k = 0; k < schedules.size(); ++k) {
          DataflowGraph g = g0;
          g.states[s].nodes[n].schedule = schedules[k];
          check(name + " " + g0.states[s].nodes[n].name + " " + schedules[k].describe(), expected, g, false,
                k % 2 ? 4 : 1);
        }
      }

    // Random transformation sequences of length 1..6, mixed with random
    // schedule changes.
    for (int walk = 0; walk < 60; ++walk) {
      DataflowGraph g = g0;
      bool reassoc = false;
      std::string trail = name + " walk";
      const int len = std::uniform_int_distribution<int>(1, 6)(rng);
      for (int step = 0; step < len; ++step) {
        const auto options = list_applicable(g);
        const bool pick_schedule = options.empty() || std::uniform_int_distribution<int>(0, 3)(rng) == 0;
        if (pick_schedule) {
          std::vector<std::pair<int, int>> nodes;
          for (std::size_t s = 0; s < g.states.size(); ++s)
            for (std::size_t n = 0; n < g.states[s].nodes.size(); ++n) nodes.emplace_back(int(s), int(n));
          if (nodes.empty()) break;
          const auto [s, n] = nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)];
          auto& node = g.states[std::size_t(s)].nodes[std::size_t(n)];
          const auto schedules = enumerate_schedules(node, g);
          if (schedules.empty()) continue;
          node.schedule = schedules[std::uniform_int_distribution<std::size_t>(0, schedules.size() - 1)(rng)];
          trail += " | schedule " + node.name;
        } else {
          const Transformation t = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
          apply(g, t);
          reassoc = reassoc || t.kind == XKind::PowerRewrite;
          trail += " | " + t.describe();
        }
      }
      check(trail, expected, g, reassoc, walk % 2 ? 4 : 1);
    }
  }
  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = failures == 0 && cases >= kMinOracleCases && elapsed <= kOracleBudgetS;
  o.detail = fmt("%d cases (%d with PowerRewrite, worst rel %.3g), %d failures, %.1f s", cases, reassoc_cases,
                 worst_rel, failures, elapsed);
  if (failures) o.detail += "; first: " + first_failure;
  return o;
}

// 2. Movement queries equal a unique-address oracle.
Outcome movement_exactness() {
  int kernels = 0, mismatches = 0;
  std::string first;
  const double bw = 10e9;
  std::vector<std::string> programs = kPrograms;
  programs.push_back("dycore");
  for (const auto& name : programs) {
    const DataflowGraph g = compile_corpus(name, kSmall);
    const RefProgram prog = reference_program(g);
    DenseSet d = reference_inputs(prog, 1);
    // per call: field -> (read addresses, write addresses)
    std::vector<std::map<std::string, std::pair<std::set<std::int64_t>, std::set<std::int64_t>>>> seen(
        prog.calls.size());
    RefObserver obs = [&](int call, int, const std::string& f, std::int64_t idx, bool write) {
      auto& e = seen[std::size_t(call)][f];
      (write ? e.second : e.first).insert(idx);
    };
    run_reference(prog, d, &obs);
    const auto trace = unrolled_trace(g);
    for (std::size_t c = 0; c < trace.size(); ++c) {
      const auto& node = g.states[std::size_t(trace[c].state)].nodes[std::size_t(trace[c].node)];
      ++kernels;
      std::map<std::string, Movement> oracle;
      std::int64_t oracle_total = 0;
      for (const auto& [f, rw] : seen[c]) {
        const std::int64_t es = element_size(g.container(f).element);
        oracle[f] = {std::int64_t(rw.first.size()) * es, std::int64_t(rw.second.size()) * es};
        // cached containers never reach memory
        if (node.schedule.cache_of(f) == CacheKind::None) oracle_total += oracle[f].read_bytes + oracle[f].write_bytes;
      }
      auto query = query_movement(g, node);
      for (auto it = query.begin(); it != query.end();)
        it = (it->second.read_bytes == 0 && it->second.write_bytes == 0) ? query.erase(it) : std::next(it);
      const bool ok = query == oracle && unique_bytes(g, node) == oracle_total &&
                      model_kernel(g, node, bw) == double(oracle_total) / bw;
      if (!ok && mismatches++ == 0) {
        first = name + "/" + node.name + ":";
        for (const auto& [f, m] : oracle) {
          const auto q = query.count(f) ? query.at(f) : Movement{};
          first += fmt(" %s oracle r%lld w%lld query r%lld w%lld;", f.c_str(), (long long)m.read_bytes,
                       (long long)m.write_bytes, (long long)q.read_bytes, (long long)q.write_bytes);
        }
      }
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && kernels > 0;
  o.detail = fmt("%d kernels, %d mismatches", kernels, mismatches);
  if (mismatches) o.detail += "; first: " + first;
  return o;
}

// 3. Copy stencil reaches the copy-probe bandwidth.
Outcome bandwidth_ceiling() {
  const std::int64_t llc = llc_bytes();
  const std::int64_t plane = 512 * 512;
  // in + out, 8 bytes each, at least 4x the last-level cache
  const int nk = int((4 * llc + 16 * plane - 1) / (16 * plane));
  const Domain d{512, 512, nk};
  double stencil_bw = 0.0;
  std::int64_t bytes = 0;
  {
    const DataflowGraph g = compile_corpus("copy", d);
    const auto& node = g.states[0].nodes[0];
    bytes = unique_bytes(g, node);
    const BenchResult r = bench(g);
    stencil_bw = double(bytes) / kernel_median(r, node.name);
  }
  const BandwidthProbe probe = measure_bandwidth(bytes, kReps);
  const double ratio = stencil_bw / probe.bytes_per_second;
  Outcome o;
  o.pass = ratio >= kBandwidthFloor && bytes >= 4 * llc;
  o.detail = fmt("domain 512x512x%d, %.0f MB moved (LLC %.0f MB), stencil %.2f GB/s, probe %.2f GB/s, ratio %.3f", nk,
                 bytes / 1e6, llc / 1e6, stencil_bw / 1e9, probe.bytes_per_second / 1e9, ratio);
  return o;
}

double report_bandwidth() { return measure_bandwidth(std::int64_t(512) << 20, kReps).bytes_per_second; }

// 4. PowerRewrite speeds up the Smagorinsky kernel.
Outcome power_rewrite() {
  const DataflowGraph g0 = compile_corpus("smagorinsky", kLarge);
  const auto t = find_kind(g0, XKind::PowerRewrite);
  if (!t) return {false, "PowerRewrite not applicable"};
  DataflowGraph g1 = g0;
  apply(g1, *t);
  const std::string name = g0.states[0].nodes[0].name;
  const BenchResult r0 = bench(g0);
  const BenchResult r1 = bench(g1);
  const double t0 = kernel_median(r0, name), t1 = kernel_median(r1, name);
  const double bw = report_bandwidth();
  const double u0 = build_report(g0, r0, bw).entries.at(0).utilization;
  const double u1 = build_report(g1, r1, bw).entries.at(0).utilization;
  int pows = 0;
  for (const auto& b : g1.states[0].nodes[0].blocks)
    for (const auto& st : b.statements) pows += count_rewritable_powers(st.value);
  Outcome o;
  o.pass = t1 <= kPowerTimeRatio * t0 && u1 > u0 && pows == 0;
  o.detail = fmt("%.1f us -> %.1f us (ratio %.3f), utilization %.2f%% -> %.2f%%, %d pow left", t0 * 1e6, t1 * 1e6,
                 t1 / t0, u0 * 100, u1 * 100, pows);
  return o;
}

// Cells where some region statement of the node does work, counted
// point by point from the region predicates.
std::int64_t region_cells(const StencilNode& node, const Domain& d) {
  // Every edge is owned here; i_end / j_end name the last index.
  if (!(d.west && d.east && d.south && d.north)) throw std::runtime_error("region oracle needs all edges owned");
  auto bound = [](const AxisBound& b, int n) { return b.anchor == AxisBound::Anchor::Start ? b.offset : n - 1 + b.offset; };
  auto inside = [&](const AxisConstraint& c, int x, int n) {
    if (c.full) return true;
    if (c.lo && x < bound(*c.lo, n)) return false;
    if (c.hi && x >= bound(*c.hi, n)) return false;
    return true;
  };
  std::set<std::tuple<int, int, int>> cells;
  for (const auto& b : node.blocks) {
    const Range kr = b.interval.resolve(d.nk);
    for (const auto& st : b.statements) {
      if (!st.region) continue;
      for (int j = 0; j < d.nj; ++j)
        for (int i = 0; i < d.ni; ++i)
          if (inside(st.region->i, i, d.ni) && inside(st.region->j, j, d.nj))
            for (auto k = kr.lo; k < kr.hi; ++k) cells.insert({i, j, int(k)});
    }
  }
  return std::int64_t(cells.size());
}

// 5. RegionPrune removes the idle iterations of a corner kernel.
Outcome region_prune() {
  const DataflowGraph g0 = compile_corpus("corners", kLarge);
  const auto t = find_kind(g0, XKind::RegionPrune);
  if (!t) return {false, "RegionPrune not applicable"};
  DataflowGraph g1 = g0;
  apply(g1, *t);
  const auto& n0 = g0.states[0].nodes[0];
  const auto& n1 = g1.states[0].nodes[0];
  const std::int64_t it0 = worker_iterations(expand(n0, g0));
  const std::int64_t it1 = worker_iterations(expand(n1, g1));
  const std::int64_t cells = region_cells(n0, g0.domain);
  const BenchResult r0 = bench(g0), r1 = bench(g1);
  const double t0 = kernel_median(r0, n0.name), t1 = kernel_median(r1, n1.name);
  const double bw = report_bandwidth();
  const double u0 = build_report(g0, r0, bw).entries.at(0).utilization;
  const double u1 = build_report(g1, r1, bw).entries.at(0).utilization;
  Outcome o;
  o.pass = it1 == cells && t1 < t0;
  o.detail = fmt("iterations %lld -> %lld, region cells %lld, %.1f us -> %.1f us, utilization %.3f%% -> %.3f%%",
                 (long long)it0, (long long)it1, (long long)cells, t0 * 1e6, t1 * 1e6, u0 * 100, u1 * 100);
  return o;
}

// Median of interleaved repeated measurements, to keep two graphs under the
// same machine conditions.
std::pair<double, double> paired_cost(const DataflowGraph& a, const DataflowGraph& b, const TunerOptions& opts,
                                      int rounds = 5) {
  std::vector<double> ca, cb;
  for (int r = 0; r < rounds; ++r) {
    ca.push_back(graph_cost(a, opts));
    cb.push_back(graph_cost(b, opts));
  }
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return {ca[ca.size() / 2], cb[cb.size() / 2]};
}

// 6. Transfer tuning evaluates few configurations and keeps quality.
Outcome transfer_tuning() {
  const auto t0 = std::chrono::steady_clock::now();
  TunerOptions opts;  // depth 2, M 2, gain 2%, noise margin 2%, 10 reps
  const DataflowGraph module = compile_corpus("transport", kTune);
  DataflowGraph target = compile_corpus("dycore", kTune);
  run_driver_passes(target);

  const Phase1Result p1 = tune_module(module, opts);
  const TransferResult tr = transfer(p1.patterns, target, opts);
  const double space = exhaustive_space(target, opts.depth);
  // phase-1 evaluations are counted too
  const double ratio = double(p1.evaluated + tr.evaluated) / space;

  // Best configuration of the whole module found by exhaustive search,
  // versus the module after transferring the patterns onto it.
  const DataflowGraph whole = extract_cutout(module, 0, 0, int(module.states[0].nodes.size()));
  const CutoutResult ex = tune_cutout(whole, opts);
  const DataflowGraph best = replay(whole, ex.ranked.at(0));
  const TransferResult on_module = transfer(p1.patterns, whole, opts);
  const auto [t_best, t_after] = paired_cost(best, on_module.graph, opts);
  const double quality = t_best / t_after;

  const auto [corpus_before, corpus_after] = paired_cost(target, tr.graph, opts, 3);
  const DenseSet expected = reference_outputs(target, 1);
  const Comparison eq = run_and_compare(expected, tr.graph, 1, 1);
  bool reassoc = false;
  for (const auto& p : p1.patterns)
    for (const auto& s : p.steps) reassoc = reassoc || s.kind == XKind::PowerRewrite;
  const bool equivalent = eq.bitwise || (reassoc && eq.max_rel <= kReassocRel);

  const double elapsed = seconds_since(t0);
  Outcome o;
  o.pass = ratio <= kTransferSpaceRatio && quality >= kTransferQuality && equivalent && elapsed <= kTransferBudgetS;
  o.detail = fmt("phase1 %zu configs, %zu patterns; phase1 + transfer evaluated %zu of exhaustive %.0f (%.4f), %zu/%zu "
                 "applied; module best %.3f ms vs transferred %.3f ms (quality %.3f, best = %s); corpus %.3f -> "
                 "%.3f ms; outputs %s; %.0f s",
                 p1.evaluated, p1.patterns.size(), p1.evaluated + tr.evaluated, space, ratio, tr.applied, tr.matches, t_best * 1e3,
                 t_after * 1e3, quality, ex.ranked.at(0).id().c_str(), corpus_before * 1e3, corpus_after * 1e3,
                 equivalent ? "equal" : "DIFFER", elapsed);
  return o;
}

// Slowest order per node among schedules with no tiles and no caches,
// each order with as many mapped dimensions as valid.
DataflowGraph worst_schedule_graph(const DataflowGraph& g, std::string& log) {
  DataflowGraph worst = g;
  FieldSet fields = allocate_fields(g);
  fill_inputs(fields, g, 1);
  std::map<std::pair<int, int>, std::map<std::string, double>> params;
  for (const auto& e : unrolled_trace(g)) params.try_emplace({e.state, e.node}, e.params);

  for (std::size_t s = 0; s < g.states.size(); ++s)
    for (std::size_t n = 0; n < g.states[s].nodes.size(); ++n) {
      const auto it = params.find({int(s), int(n)});
      if (it == params.end()) continue;  // never executed
      const StencilNode& node = g.states[s].nodes[n];
      std::map<DimOrder, Schedule> by_order;
      for (const auto& sc : enumerate_schedules(node, g)) {
        if (sc.tile != std::array<int, 3>{0, 0, 0} || !sc.caches.empty() || sc.region != node.schedule.region) continue;
        auto [pos, fresh] = by_order.try_emplace(sc.order, sc);
        const auto maps = [](const Schedule& x) { return int(x.map[0]) + int(x.map[1]) + int(x.map[2]); };
        if (!fresh && maps(sc) > maps(pos->second)) pos->second = sc;
      }
      double slowest = -1.0;
      Schedule pick = node.schedule;
      for (const auto& [order, sc] : by_order) {
        DataflowGraph trial = g;
        trial.states[s].nodes[n].schedule = sc;
        Executor ex(trial, 1);
        std::vector<double> t;
        for (int r = 0; r < 3; ++r) {
          const auto t0 = std::chrono::steady_clock::now();
          ex.run_node(int(s), int(n), it->second, fields);
          t.push_back(seconds_since(t0));
        }
        std::sort(t.begin(), t.end());
        if (t[1] > slowest) {
          slowest = t[1];
          pick = sc;
        }
      }
      worst.states[s].nodes[n].schedule = pick;
      log += " " + node.name + "=" + order_string(pick.order);
    }
  return worst;
}

// 7. Default schedules beat the worst valid schedules.
Outcome schedule_heuristics() {
  const DataflowGraph g = compile_corpus("dycore", kLarge);
  std::string picks;
  const DataflowGraph worst = worst_schedule_graph(g, picks);
  const double t_default = bench(g).total.median();
  const double t_worst = bench(worst).total.median();
  const double gain = t_worst / t_default;
  Outcome o;
  o.pass = gain >= kScheduleGain;
  o.detail = fmt("default %.1f ms, worst %.1f ms, gain %.2fx; worst orders:", t_default * 1e3, t_worst * 1e3, gain) +
             picks;
  return o;
}

std::string sflow_bin;

std::map<std::string, std::string> dir_bytes(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = read_text(e.path().string());
  return out;
}

// 8. compile, tune (model cost) and report give identical bytes twice.
Outcome determinism() {
  const std::string root = (fs::temp_directory_path() / "sflow_determinism").string();
  fs::remove_all(root);
  const std::vector<std::string> commands{
      "compile dycore --domain 16,16,8 --optimize",
      "tune dycore --domain 32,32,16 --set model_cost=true",
      "report dycore --domain 32,32,16 --set model_cost=true",
  };
  std::vector<std::string> notes;
  bool pass = true;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
      const std::string out = root + "/" + std::to_string(c) + "_" + std::to_string(r);
      const std::string cmd = sflow_bin + " " + commands[c] + " -o " + out + " > /dev/null 2>&1";
      if (std::system(cmd.c_str()) != 0) {
        pass = false;
        notes.push_back("'" + commands[c] + "' failed");
        break;
      }
      runs[r] = dir_bytes(out);
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    pass = pass && same;
    notes.push_back(commands[c].substr(0, commands[c].find(' ')) + (same ? " identical" : " DIFFERS") +
                    fmt(" (%zu files)", runs[0].size()));
  }
  fs::remove_all(root);
  Outcome o;
  o.pass = pass;
  for (std::size_t i = 0; i < notes.size(); ++i) o.detail += (i ? ", " : "") + notes[i];
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<int> only;
  sflow_bin = SFLOW_BIN;
  app.add_option("--only", only, "criterion number (1-8)");
  app.add_option("--sflow", sflow_bin, "path to the sflow binary");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle-equivalence", oracle_equivalence}, {"movement-exactness", movement_exactness},
      {"bandwidth-ceiling", bandwidth_ceiling},   {"power-rewrite", power_rewrite},
      {"region-prune", region_prune},             {"transfer-tuning", transfer_tuning},
      {"schedule-heuristics", schedule_heuristics}, {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = int(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed ? 1 : 0;
}
