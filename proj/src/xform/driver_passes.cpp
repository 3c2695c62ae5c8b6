#include <algorithm>
#include <cmath>
#include <deque>

#include "sf/sched/validity.hpp"
#include "sf/xform/transforms.hpp"

namespace sf {

namespace {

// Constant lattice: a missing entry is "not yet seen".
struct Value {
  bool constant = false;
  double v = 0.0;
  friend bool operator==(const Value&, const Value&) = default;
};
using Env = std::map<std::string, Value>;

Env meet(const Env& a, const Env& b) {
  Env out = a;
  for (const auto& [k, x] : b) {
    auto it = out.find(k);
    if (it == out.end()) {
      out[k] = x;
    } else if (!(it->second == x)) {
      it->second = Value{};
    }
  }
  return out;
}

NameLookup lookup(const Env& env) {
  return [&env](const std::string& n) -> std::optional<double> {
    auto it = env.find(n);
    if (it == env.end() || !it->second.constant) return std::nullopt;
    return it->second.v;
  };
}

Value evaluate(const Expr& e, const Env& env) {
  const Expr f = fold(e, lookup(env));
  if (f.is_literal()) return {true, f.value};
  return {};
}

void assign(Env& env, const std::vector<std::pair<std::string, Expr>>& assignments) {
  for (const auto& [k, v] : assignments) env[k] = evaluate(v, env);
}

// Entry environment of every reachable state.
std::vector<std::optional<Env>> solve(const DataflowGraph& g) {
  std::vector<std::optional<Env>> in(g.states.size());
  if (g.states.empty()) return in;
  Env start;
  for (const auto& c : g.configs) start[c.name] = {true, c.value};
  for (const auto& p : g.params) start[p.name] = {};
  in[std::size_t(g.start)] = start;
  std::deque<int> work{g.start};
  while (!work.empty()) {
    const int s = work.front();
    work.pop_front();
    for (const auto& t : g.transitions) {
      if (t.from != s) continue;
      Env out = *in[std::size_t(s)];
      assign(out, t.assignments);
      auto& dst = in[std::size_t(t.to)];
      Env merged = dst ? meet(*dst, out) : out;
      if (!dst || merged != *dst) {
        dst = std::move(merged);
        work.push_back(t.to);
      }
    }
  }
  return in;
}

void compact(DataflowGraph& g, const std::vector<bool>& keep) {
  std::vector<int> remap(g.states.size(), -1);
  std::vector<DataflowState> states;
  for (std::size_t s = 0; s < g.states.size(); ++s)
    if (keep[s]) {
      remap[s] = int(states.size());
      states.push_back(std::move(g.states[s]));
    }
  std::vector<Transition> trans;
  for (auto& t : g.transitions) {
    if (remap[std::size_t(t.from)] < 0 || remap[std::size_t(t.to)] < 0) continue;
    t.from = remap[std::size_t(t.from)];
    t.to = remap[std::size_t(t.to)];
    trans.push_back(std::move(t));
  }
  std::vector<LoopInfo> loops;
  for (auto& l : g.loops) {
    if (remap[std::size_t(l.guard)] < 0 || remap[std::size_t(l.exit)] < 0) continue;
    l.guard = remap[std::size_t(l.guard)];
    l.exit = remap[std::size_t(l.exit)];
    std::vector<int> body;
    for (int b : l.body)
      if (remap[std::size_t(b)] >= 0) body.push_back(remap[std::size_t(b)]);
    l.body = std::move(body);
    loops.push_back(std::move(l));
  }
  if (remap[std::size_t(g.start)] < 0) throw InternalError("start state removed");
  g.start = remap[std::size_t(g.start)];
  g.states = std::move(states);
  g.transitions = std::move(trans);
  g.loops = std::move(loops);
}

std::vector<bool> reachable(const DataflowGraph& g) {
  std::vector<bool> seen(g.states.size(), false);
  if (g.states.empty()) return seen;
  std::vector<int> stack{g.start};
  seen[std::size_t(g.start)] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (const auto& t : g.transitions)
      if (t.from == s && !seen[std::size_t(t.to)]) {
        seen[std::size_t(t.to)] = true;
        stack.push_back(t.to);
      }
  }
  return seen;
}

bool literal_true(const Expr& e) { return e.is_literal() && e.value != 0.0; }
bool literal_false(const Expr& e) { return e.is_literal() && e.value == 0.0; }

}  // namespace

void constant_propagation(DataflowGraph& g) {
  const auto in = solve(g);
  Env configs;
  for (const auto& c : g.configs) configs[c.name] = {true, c.value};

  for (auto& t : g.transitions) {
    if (!in[std::size_t(t.from)]) continue;
    Env env = *in[std::size_t(t.from)];
    t.condition = fold(t.condition, lookup(env));
    for (auto& [k, v] : t.assignments) {
      v = fold(v, lookup(env));
      env[k] = v.is_literal() ? Value{true, v.value} : Value{};
    }
  }
  for (auto& l : g.loops)
    if (in[std::size_t(l.guard)]) {
      Env env = *in[std::size_t(l.guard)];
      env.erase(l.var);
      l.trip = fold(l.trip, lookup(env));
    }
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    if (!in[s]) continue;
    for (auto& n : g.states[s].nodes) {
      Env local = configs;
      std::vector<std::pair<std::string, Expr>> kept;
      for (auto& [k, v] : n.bindings) {
        v = fold(v, lookup(*in[s]));
        if (v.is_literal())
          local[k] = {true, v.value};
        else
          kept.emplace_back(k, v);
      }
      for (const auto& [k, v] : kept) local.erase(k);
      n.bindings = std::move(kept);
      for (auto& b : n.blocks)
        for (auto& st : b.statements) st.value = fold(st.value, lookup(local));
    }
  }
}

bool constant_propagation_changes(const DataflowGraph& g) {
  DataflowGraph copy = g;
  constant_propagation(copy);
  return !same_graph(copy, g);
}

void dead_branch_elimination(DataflowGraph& g) {
  std::vector<Transition> kept;
  std::vector<bool> closed(g.states.size(), false);
  for (auto& t : g.transitions) {
    if (closed[std::size_t(t.from)] || literal_false(t.condition)) continue;
    if (literal_true(t.condition)) closed[std::size_t(t.from)] = true;
    kept.push_back(std::move(t));
  }
  g.transitions = std::move(kept);
  compact(g, reachable(g));
}

bool dead_branches_present(const DataflowGraph& g) {
  std::vector<bool> closed(g.states.size(), false);
  for (const auto& t : g.transitions) {
    if (closed[std::size_t(t.from)] || literal_false(t.condition)) return true;
    if (literal_true(t.condition)) closed[std::size_t(t.from)] = true;
  }
  for (bool r : reachable(g))
    if (!r) return true;
  return false;
}

namespace {

constexpr int kMaxUnroll = 64;

struct LoopShape {
  int enter = -1;  // transition guard -> first body state
  int exit = -1;   // transition guard -> exit state
  int first = -1;
  long trip = 0;
};

std::optional<LoopShape> loop_shape(const DataflowGraph& g, int l) {
  if (l < 0 || std::size_t(l) >= g.loops.size())
    throw Error("unknown location", "no loop " + std::to_string(l));
  const LoopInfo& loop = g.loops[std::size_t(l)];
  if (!loop.unroll || loop.body.empty()) return std::nullopt;
  Env configs;
  for (const auto& c : g.configs) configs[c.name] = {true, c.value};
  const Expr trip = fold(loop.trip, lookup(configs));
  if (!trip.is_literal() || trip.value < 0 || std::floor(trip.value) != trip.value || trip.value > kMaxUnroll)
    return std::nullopt;
  const std::set<int> body(loop.body.begin(), loop.body.end());
  for (std::size_t o = 0; o < g.loops.size(); ++o)
    if (int(o) != l && body.count(g.loops[o].guard)) return std::nullopt;  // nested loop
  bool has_nodes = false;
  for (int b : loop.body) has_nodes = has_nodes || !g.states[std::size_t(b)].nodes.empty();
  if (!has_nodes || !g.states[std::size_t(loop.guard)].nodes.empty()) return std::nullopt;

  LoopShape shape;
  shape.trip = long(trip.value);
  for (std::size_t t = 0; t < g.transitions.size(); ++t) {
    const auto& tr = g.transitions[t];
    if (tr.from == loop.guard) {
      if (body.count(tr.to) && shape.enter < 0) {
        shape.enter = int(t);
        shape.first = tr.to;
      } else if (tr.to == loop.exit && shape.exit < 0) {
        shape.exit = int(t);
      } else {
        return std::nullopt;
      }
    } else if (body.count(tr.from) && !body.count(tr.to) && tr.to != loop.guard) {
      return std::nullopt;  // leaves the loop other than through the guard
    }
  }
  if (shape.enter < 0 || shape.exit < 0) return std::nullopt;
  return shape;
}

std::vector<std::pair<std::string, Expr>> concat(std::vector<std::pair<std::string, Expr>> a,
                                                 const std::vector<std::pair<std::string, Expr>>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

bool loop_unrollable(const DataflowGraph& g, int loop) { return loop_shape(g, loop).has_value(); }

void loop_unroll(DataflowGraph& g, int l) {
  const auto shape = loop_shape(g, l);
  if (!shape) throw Error("transform", "loop " + std::to_string(l) + " cannot be unrolled");
  const LoopInfo loop = g.loops[std::size_t(l)];
  const std::set<int> body(loop.body.begin(), loop.body.end());
  const Transition enter = g.transitions[std::size_t(shape->enter)];
  const Transition leave = g.transitions[std::size_t(shape->exit)];
  const long n = shape->trip;

  std::vector<std::map<int, int>> copies(static_cast<std::size_t>(n));
  for (long c = 0; c < n; ++c)
    for (int b : loop.body) {
      DataflowState st = g.states[std::size_t(b)];
      st.label += "_u" + std::to_string(c);
      copies[std::size_t(c)][b] = int(g.states.size());
      g.states.push_back(std::move(st));
    }
  auto next_entry = [&](long c, const Transition& t) {
    Transition out = t;
    if (c < n) {
      out.to = copies[std::size_t(c)].at(shape->first);
      out.assignments = concat(t.assignments, enter.assignments);
    } else {
      out.to = loop.exit;
      out.assignments = concat(t.assignments, leave.assignments);
    }
    return out;
  };

  std::vector<Transition> trans;
  for (const auto& t : g.transitions) {
    if (t.from == loop.guard || body.count(t.from)) continue;
    trans.push_back(t.to == loop.guard ? next_entry(0, t) : t);
  }
  for (long c = 0; c < n; ++c)
    for (const auto& t : g.transitions) {
      if (!body.count(t.from)) continue;
      Transition out = t.to == loop.guard ? next_entry(c + 1, t) : t;
      out.from = copies[std::size_t(c)].at(t.from);
      if (t.to != loop.guard) out.to = copies[std::size_t(c)].at(t.to);
      trans.push_back(std::move(out));
    }
  g.transitions = std::move(trans);

  for (std::size_t o = 0; o < g.loops.size(); ++o) {
    if (int(o) == l) continue;
    auto& outer = g.loops[o];
    if (std::find(outer.body.begin(), outer.body.end(), loop.guard) == outer.body.end()) continue;
    for (const auto& m : copies)
      for (const auto& [from, to] : m) outer.body.push_back(to);
  }
  g.loops.erase(g.loops.begin() + l);

  std::vector<bool> keep(g.states.size(), true);
  keep[std::size_t(loop.guard)] = false;
  for (int b : loop.body) keep[std::size_t(b)] = false;
  compact(g, keep);

  // Copies of a node now share its temporaries, which can void a local cache.
  for (auto& st : g.states)
    for (auto& n : st.nodes)
      if (!schedule_validity(n, g, n.schedule).ok) n.schedule = default_schedule(n, g);
}

}  // namespace sf
