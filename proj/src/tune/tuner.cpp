#include "sf/tune/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "sf/exec/reference.hpp"
#include "sf/exec/timing.hpp"
#include "sf/ir/expand.hpp"
#include "sf/perf/model.hpp"
#include "sf/sched/validity.hpp"

namespace sf {

namespace {

// Relative tolerance for rewrites that re-associate arithmetic.
constexpr double kReassocTolerance = 1e-12;

bool tunable(XKind k) {
  return k != XKind::ConstantPropagation && k != XKind::DeadBranchElimination && k != XKind::LoopUnroll;
}

std::vector<Transformation> tunable_transformations(const DataflowGraph& g) {
  std::vector<Transformation> out;
  for (auto& t : list_applicable(g))
    if (tunable(t.kind)) out.push_back(std::move(t));
  return out;
}

std::string canonical(const DataflowGraph& g) {
  auto j = graph_to_json(g);
  j.erase("graph_version");
  return j.dump();
}

struct Oracle {
  DenseSet expected;

  Oracle(const DataflowGraph& g, std::uint64_t seed) {
    const RefProgram prog = reference_program(g);
    expected = reference_inputs(prog, seed);
    run_reference(prog, expected);
  }

  bool check(const DataflowGraph& g, bool reassociates, std::uint64_t seed, int workers) const {
    FieldSet f = allocate_fields(g);
    fill_inputs(f, g, seed);
    Executor ex(g, workers);
    ex.run(f);
    const Comparison c = compare(expected, f, g);
    return c.bitwise || (reassociates && c.max_rel <= kReassocTolerance);
  }
};

bool has_power_rewrite(const std::vector<Transformation>& ts) {
  for (const auto& t : ts)
    if (t.kind == XKind::PowerRewrite) return true;
  return false;
}

}  // namespace

std::string TuningConfig::id() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < transformations.size(); ++i) os << (i ? ";" : "") << transformations[i].describe();
  if (!k_outer.empty()) {
    os << "|k";
    for (int k : k_outer) os << ":" << k;
  }
  return os.str().empty() ? "baseline" : os.str();
}

nlohmann::json TuningConfig::to_json() const {
  nlohmann::json j;
  j["transformations"] = nlohmann::json::array();
  for (const auto& t : transformations) j["transformations"].push_back(transformation_to_json(t));
  j["k_outer"] = k_outer;
  j["cost"] = cost;
  return j;
}

std::optional<Schedule> k_outer_schedule(const StencilNode& node, const DataflowGraph& g) {
  Schedule s = node.schedule;
  s.order = make_order(1, {Dim::K, Dim::J, Dim::I});
  s.map = {true, true, !node.vertical()};
  s.tile = {0, 0, 0};
  if (!schedule_validity(node, g, s).ok) {
    s.caches.clear();
    if (!schedule_validity(node, g, s).ok) return std::nullopt;
  }
  for (const auto& f : cache_candidates(node, g)) {
    if (s.cache_of(f) != CacheKind::None) continue;
    const CacheKind k = feasible_cache(node, g, s, f);
    if (k == CacheKind::None) continue;
    Schedule t = s;
    t.caches[f] = k;
    if (schedule_validity(node, g, t).ok) s = t;
  }
  if (s == node.schedule) return std::nullopt;
  // With one section and nothing cached differently the nests are the same.
  if (!node.vertical() && node_sections(node, s.region).size() == 1 && s.caches == node.schedule.caches &&
      s.map == node.schedule.map && s.tile == node.schedule.tile && s.region == node.schedule.region)
    return std::nullopt;
  return s;
}

DataflowGraph replay(const DataflowGraph& graph, const TuningConfig& config) {
  DataflowGraph g = graph;
  for (const auto& t : config.transformations) apply(g, t);
  for (int k : config.k_outer) {
    auto& node = g.states.at(0).nodes.at(std::size_t(k));
    const auto s = k_outer_schedule(node, g);
    if (!s) throw Error("transform", "K-outer schedule not available for " + node.name);
    node.schedule = *s;
  }
  rebuild_all(g);
  return g;
}

double graph_cost(const DataflowGraph& g, const TunerOptions& opts) {
  if (opts.model_cost) return model_graph(g, opts.bandwidth);
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, opts.seed);
  return benchmark(g, f, opts.reps, opts.workers).total.median();
}

CutoutResult tune_cutout(const DataflowGraph& cutout, const TunerOptions& opts, const TuneLog& log) {
  CutoutResult res;
  for (const auto& n : cutout.states.at(0).nodes) {
    res.names.push_back(n.name);
    res.cutout += (res.cutout.empty() ? "" : ",") + n.name;
  }

  struct Variant {
    DataflowGraph g;
    std::vector<Transformation> seq;
  };
  std::vector<Variant> variants{{cutout, {}}};
  std::set<std::string> seen{canonical(cutout)};
  for (std::size_t v = 0; v < variants.size(); ++v) {
    if (int(variants[v].seq.size()) >= opts.depth) continue;
    for (const auto& t : tunable_transformations(variants[v].g)) {
      Variant next{variants[v].g, variants[v].seq};
      apply(next.g, t);
      next.seq.push_back(t);
      if (seen.insert(canonical(next.g)).second) variants.push_back(std::move(next));
    }
  }

  std::vector<TuningConfig> configs;
  for (const auto& v : variants) {
    std::vector<int> options;
    const auto& nodes = v.g.states.at(0).nodes;
    for (std::size_t n = 0; n < nodes.size(); ++n)
      if (k_outer_schedule(nodes[n], v.g)) options.push_back(int(n));
    for (std::size_t mask = 0; mask < (std::size_t(1) << options.size()); ++mask) {
      TuningConfig c;
      c.transformations = v.seq;
      c.reassociates = has_power_rewrite(v.seq);
      for (std::size_t o = 0; o < options.size(); ++o)
        if (mask & (std::size_t(1) << o)) c.k_outer.push_back(options[o]);
      configs.push_back(std::move(c));
    }
  }
  res.space = configs.size();

  const Oracle oracle(cutout, opts.seed);
  for (auto& c : configs) {
    const DataflowGraph g = replay(cutout, c);
    ++res.evaluated;
    nlohmann::json entry{{"cutout", res.cutout}, {"config", c.id()}};
    if (!oracle.check(g, c.reassociates, opts.seed, opts.workers)) {
      ++res.rejected;
      entry["status"] = "rejected";
      entry["reason"] = "output differs from the reference";
      if (log) log(entry);
      continue;
    }
    c.cost = graph_cost(g, opts);
    entry["status"] = "measured";
    entry["cost"] = c.cost;
    if (log) log(entry);
    if (c.transformations.empty() && c.k_outer.empty()) res.baseline = c.cost;
    res.ranked.push_back(c);
  }
  std::stable_sort(res.ranked.begin(), res.ranked.end(), [](const TuningConfig& a, const TuningConfig& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    const std::size_t na = a.transformations.size() + a.k_outer.size();
    const std::size_t nb = b.transformations.size() + b.k_outer.size();
    if (na != nb) return na < nb;
    return a.id() < b.id();
  });
  return res;
}

std::string Pattern::id() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < names.size(); ++i) os << (i ? "," : "") << names[i];
  os << "|";
  for (std::size_t i = 0; i < steps.size(); ++i) {
    os << (i ? ";" : "") << xkind_name(steps[i].kind);
    if (steps[i].offset >= 0) os << "@" << steps[i].offset;
    if (!steps[i].field.empty()) os << ":" << steps[i].field;
  }
  if (!k_outer.empty()) {
    os << "|k";
    for (int k : k_outer) os << ":" << k;
  }
  return os.str();
}

std::vector<Pattern> extract_patterns(const CutoutResult& r, const TunerOptions& opts) {
  std::vector<Pattern> out;
  if (r.ranked.empty() || !(r.baseline > 0)) return out;
  for (std::size_t i = 0; i < r.ranked.size() && i < std::size_t(std::max(opts.m, 1)); ++i) {
    const auto& c = r.ranked[i];
    if (c.transformations.empty() && c.k_outer.empty()) continue;
    const double gain = (r.baseline - c.cost) / r.baseline;
    if (gain < opts.gain) continue;
    Pattern p;
    p.names = r.names;
    for (const auto& t : c.transformations) p.steps.push_back({t.kind, t.node, t.field});
    p.k_outer = c.k_outer;
    p.source_gain = gain;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Pattern> merge_patterns(std::vector<Pattern> patterns) {
  std::map<std::string, Pattern> by_id;
  for (auto& p : patterns) {
    auto it = by_id.find(p.id());
    if (it == by_id.end())
      by_id.emplace(p.id(), std::move(p));
    else
      it->second.source_gain = std::max(it->second.source_gain, p.source_gain);
  }
  std::vector<Pattern> out;
  for (auto& [id, p] : by_id) out.push_back(std::move(p));
  std::stable_sort(out.begin(), out.end(), [](const Pattern& a, const Pattern& b) {
    if (a.source_gain != b.source_gain) return a.source_gain > b.source_gain;
    return a.id() < b.id();
  });
  return out;
}

nlohmann::json patterns_to_json(const std::vector<Pattern>& patterns, const TunerOptions& opts) {
  nlohmann::json j;
  j["format"] = "stencilflow-patterns-1";
  j["provenance"] = {{"m", opts.m},         {"gain", opts.gain},   {"depth", opts.depth},
                     {"l_max", opts.l_max}, {"seed", opts.seed},   {"model_cost", opts.model_cost},
                     {"reps", opts.reps}};
  j["patterns"] = nlohmann::json::array();
  for (const auto& p : patterns) {
    nlohmann::json e;
    e["id"] = p.id();
    e["names"] = p.names;
    e["steps"] = nlohmann::json::array();
    for (const auto& s : p.steps) {
      nlohmann::json st{{"kind", xkind_name(s.kind)}, {"offset", s.offset}};
      if (!s.field.empty()) st["field"] = s.field;
      e["steps"].push_back(st);
    }
    e["k_outer"] = p.k_outer;
    e["source_gain"] = p.source_gain;
    j["patterns"].push_back(e);
  }
  return j;
}

std::vector<Pattern> patterns_from_json(const nlohmann::json& j) {
  std::vector<Pattern> out;
  for (const auto& e : j.at("patterns")) {
    Pattern p;
    p.names = e.at("names").get<std::vector<std::string>>();
    for (const auto& s : e.at("steps"))
      p.steps.push_back({xkind_from_name(s.at("kind").get<std::string>()), s.at("offset").get<int>(),
                         s.value("field", std::string())});
    p.k_outer = e.value("k_outer", std::vector<int>{});
    p.source_gain = e.at("source_gain").get<double>();
    out.push_back(std::move(p));
  }
  return out;
}

Phase1Result tune_module(const DataflowGraph& module, const TunerOptions& opts, const TuneLog& log) {
  Phase1Result out;
  std::vector<Pattern> all;
  for (const auto& c : enumerate_cutouts(module, opts.l_max)) {
    auto r = tune_cutout(extract_cutout(module, c), opts, log);
    out.evaluated += r.evaluated;
    for (auto& p : extract_patterns(r, opts)) all.push_back(std::move(p));
    out.cutouts.push_back(std::move(r));
  }
  out.patterns = merge_patterns(std::move(all));
  return out;
}

namespace {

int find_match(const DataflowState& st, const Pattern& p) {
  const auto& nodes = st.nodes;
  for (std::size_t w = 0; w + p.names.size() <= nodes.size(); ++w) {
    bool ok = true;
    for (std::size_t i = 0; i < p.names.size() && ok; ++i) ok = nodes[w + i].name == p.names[i];
    if (ok) return int(w);
  }
  return -1;
}

// Applies a pattern at node `w` of state `s`; false when a step does not apply.
bool instantiate(DataflowGraph& g, const Pattern& p, int s, int w) {
  for (const auto& step : p.steps) {
    Transformation t;
    t.kind = step.kind;
    t.state = s;
    t.node = step.offset >= 0 ? w + step.offset : -1;
    t.field = step.field;
    t.version = g.version;
    try {
      if (!can_apply(g, t)) return false;
      apply(g, t);
    } catch (const Error&) {
      return false;
    }
  }
  for (int k : p.k_outer) {
    auto& nodes = g.states[std::size_t(s)].nodes;
    if (std::size_t(w + k) >= nodes.size()) return false;
    auto sched = k_outer_schedule(nodes[std::size_t(w + k)], g);
    if (!sched) return false;
    nodes[std::size_t(w + k)].schedule = *sched;
  }
  rebuild_all(g);
  return true;
}

}  // namespace

TransferResult transfer(const std::vector<Pattern>& patterns, const DataflowGraph& target,
                        const TunerOptions& opts, const TuneLog& log) {
  TransferResult res;
  res.graph = target;
  std::vector<const Pattern*> order;
  for (const auto& p : patterns) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(), [](const Pattern* a, const Pattern* b) {
    if (a->source_gain != b->source_gain) return a->source_gain > b->source_gain;
    return a->id() < b->id();
  });

  for (std::size_t s = 0; s < res.graph.states.size(); ++s) {
    for (const Pattern* p : order) {
      const int w = find_match(res.graph.states[s], *p);
      if (w < 0) continue;
      ++res.matches;
      AppliedPattern a;
      a.pattern = p->id();
      a.state = int(s);
      a.first = w;

      DataflowGraph cand = res.graph;
      if (!instantiate(cand, *p, int(s), w)) {
        a.reason = "not applicable";
        res.attempts.push_back(a);
        continue;
      }
      const int n0 = int(res.graph.states[s].nodes.size());
      const int n1 = int(cand.states[s].nodes.size());
      const int lo = std::max(0, w - 1);
      const int hi = std::min(n0, w + int(p->names.size()) + 1);
      const DataflowGraph before = extract_cutout(res.graph, int(s), lo, hi - lo);
      const DataflowGraph after = extract_cutout(cand, int(s), lo, hi - lo - (n0 - n1));
      a.before = graph_cost(before, opts);
      a.after = graph_cost(after, opts);
      res.evaluated += 2;

      bool reassoc = false;
      for (const auto& st : p->steps) reassoc = reassoc || st.kind == XKind::PowerRewrite;
      const Oracle oracle(before, opts.seed);
      if (!oracle.check(after, reassoc, opts.seed, opts.workers)) {
        a.reason = "output differs from the reference";
      } else if (a.after <= (1.0 - opts.noise_margin) * a.before) {
        a.accepted = true;
        res.graph = std::move(cand);
        ++res.applied;
      } else {
        a.reason = "no local improvement";
      }
      if (log)
        log({{"transfer", a.pattern}, {"state", a.state}, {"first", a.first}, {"before", a.before},
             {"after", a.after}, {"status", a.accepted ? "accepted" : "rejected"}, {"reason", a.reason}});
      res.attempts.push_back(a);
    }
  }
  return res;
}

double exhaustive_space(const DataflowGraph& g, int depth) {
  const double a = double(tunable_transformations(g).size());
  double subsets = 0.0, choose = 1.0;
  for (int d = 0; d <= depth; ++d) {
    subsets += choose;
    choose = choose * (a - d) / (d + 1);
    if (choose <= 0) break;
  }
  double menu = 1.0;
  for (const auto& st : g.states)
    for (const auto& n : st.nodes)
      if (k_outer_schedule(n, g)) menu *= 2.0;
  return subsets * menu;
}

}  // namespace sf
