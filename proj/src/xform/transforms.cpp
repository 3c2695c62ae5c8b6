#include "sf/xform/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sf/sched/validity.hpp"

namespace sf {

namespace {

const std::vector<std::pair<XKind, const char*>> kKinds = {
    {XKind::IntervalFusion, "IntervalFusion"},
    {XKind::ThreadLevelFusion, "ThreadLevelFusion"},
    {XKind::RedundantComputeFusion, "RedundantComputeFusion"},
    {XKind::LocalTemporaryElision, "LocalTemporaryElision"},
    {XKind::DeadLoadElimination, "DeadLoadElimination"},
    {XKind::CarriedValueCaching, "CarriedValueCaching"},
    {XKind::PowerRewrite, "PowerRewrite"},
    {XKind::RegionSplit, "RegionSplit"},
    {XKind::RegionPrune, "RegionPrune"},
    {XKind::ConstantPropagation, "ConstantPropagation"},
    {XKind::DeadBranchElimination, "DeadBranchElimination"},
    {XKind::LoopUnroll, "LoopUnroll"},
};

bool node_level(XKind k) {
  return k != XKind::ConstantPropagation && k != XKind::DeadBranchElimination && k != XKind::LoopUnroll;
}

bool pair_level(XKind k) {
  return k == XKind::IntervalFusion || k == XKind::ThreadLevelFusion || k == XKind::RedundantComputeFusion;
}

void check_location(const DataflowGraph& g, const Transformation& t) {
  if (!node_level(t.kind)) return;
  if (t.state < 0 || std::size_t(t.state) >= g.states.size())
    throw Error("unknown location", "no state " + std::to_string(t.state));
  const auto& nodes = g.states[std::size_t(t.state)].nodes;
  if (t.node < 0 || std::size_t(t.node) >= nodes.size())
    throw Error("unknown location", "no node " + std::to_string(t.node) + " in state " + std::to_string(t.state));
}

std::set<std::string> names_used(const StencilNode& n) {
  std::set<std::string> out;
  for (const auto& b : n.blocks)
    for (const auto& s : b.statements)
      visit(s.value, [&](const Expr& e) {
        if (e.kind == ExprKind::Name) out.insert(e.name);
      });
  return out;
}

const Expr* binding(const StencilNode& n, const std::string& name) {
  for (const auto& [k, v] : n.bindings)
    if (k == name) return &v;
  return nullptr;
}

// Bindings of the fused node; fails when one side binds a name the other
// reads with another meaning.
std::optional<std::vector<std::pair<std::string, Expr>>> merge_bindings(const StencilNode& a,
                                                                      const StencilNode& b) {
  const auto ua = names_used(a);
  const auto ub = names_used(b);
  std::vector<std::pair<std::string, Expr>> out = a.bindings;
  for (const auto& [k, v] : a.bindings) {
    const Expr* o = binding(b, k);
    if (o ? !o->same(v) : ub.count(k) > 0) return std::nullopt;
  }
  for (const auto& [k, v] : b.bindings) {
    if (binding(a, k)) continue;
    if (ua.count(k)) return std::nullopt;
    out.emplace_back(k, v);
  }
  return out;
}

struct CrossAccess {
  bool any = false;
  bool all_zero = true;
  bool all_flat = true;  // dk == 0
};

// Reads in one node of fields the other node writes.
CrossAccess cross_access(const StencilNode& a, const StencilNode& b) {
  CrossAccess out;
  auto scan = [&](const StencilNode& reader, const std::set<std::string>& written) {
    for (const auto& blk : reader.blocks)
      for (const auto& st : blk.statements)
        for (const auto& [f, o] : field_reads(st.value)) {
          if (!written.count(f)) continue;
          out.any = true;
          out.all_zero = out.all_zero && o.zero();
          out.all_flat = out.all_flat && o.dk == 0;
        }
  };
  scan(b, a.writes());
  scan(a, b.writes());
  return out;
}

void keep_valid_forwarding(StencilNode& n) {
  for (auto it = n.forwarded.begin(); it != n.forwarded.end();)
    it = forward_ok(n, n.schedule.region, *it) ? std::next(it) : n.forwarded.erase(it);
}

// Adds cache entries one at a time while the schedule stays valid.
void add_caches(StencilNode& n, const DataflowGraph& g, const std::map<std::string, CacheKind>& wanted) {
  for (const auto& [f, k] : wanted) {
    Schedule s = n.schedule;
    s.caches[f] = k;
    if (schedule_validity(n, g, s).ok) n.schedule = s;
  }
}

StencilNode merged_node(const StencilNode& a, const StencilNode& b, bool one_block,
                        std::vector<std::pair<std::string, Expr>> bindings) {
  StencilNode n;
  n.name = a.name + "+" + b.name;
  n.members = a.members;
  n.members.insert(n.members.end(), b.members.begin(), b.members.end());
  if (one_block) {
    ComputationBlock blk = a.blocks[0];
    blk.statements.insert(blk.statements.end(), b.blocks[0].statements.begin(), b.blocks[0].statements.end());
    n.blocks = {blk};
    std::vector<Box> boxes = a.boxes[0];
    boxes.insert(boxes.end(), b.boxes[0].begin(), b.boxes[0].end());
    n.boxes = {boxes};
  } else {
    n.blocks = {a.blocks[0], b.blocks[0]};
    n.boxes = {a.boxes[0], b.boxes[0]};
  }
  n.bindings = std::move(bindings);
  n.forwarded = a.forwarded;
  n.forwarded.insert(b.forwarded.begin(), b.forwarded.end());
  n.carried = a.carried;
  n.carried.insert(b.carried.begin(), b.carried.end());
  n.schedule.region = a.schedule.region == RegionStrategy::Split || b.schedule.region == RegionStrategy::Split
                          ? RegionStrategy::Split
                          : RegionStrategy::Predicated;
  return n;
}

// Replaces nodes `at` and `at + 1` of a state with `fused`; returns a reference
// to the node in place.
StencilNode& replace_pair(DataflowGraph& g, int state, int at, StencilNode fused) {
  auto& nodes = g.states[std::size_t(state)].nodes;
  nodes[std::size_t(at)] = std::move(fused);
  nodes.erase(nodes.begin() + at + 1);
  return nodes[std::size_t(at)];
}

bool fuse(DataflowGraph& g, const Transformation& t) {
  auto& nodes = g.states[std::size_t(t.state)].nodes;
  if (std::size_t(t.node) + 1 >= nodes.size()) return false;
  const StencilNode a = nodes[std::size_t(t.node)];
  const StencilNode b = nodes[std::size_t(t.node) + 1];
  if (a.blocks.size() != 1 || b.blocks.size() != 1) return false;
  const auto& ba = a.blocks[0];
  const auto& bb = b.blocks[0];
  if (ba.policy != bb.policy) return false;
  auto bindings = merge_bindings(a, b);
  if (!bindings) return false;
  const CrossAccess x = cross_access(a, b);

  std::map<std::string, CacheKind> wanted = a.schedule.caches;
  wanted.insert(b.schedule.caches.begin(), b.schedule.caches.end());

  switch (t.kind) {
    case XKind::IntervalFusion: {
      if (ba.policy == Policy::Parallel) return false;
      const bool adjacent = ba.policy == Policy::Forward ? ba.interval.end == bb.interval.start
                                                         : bb.interval.end == ba.interval.start;
      if (!adjacent) return false;
      StencilNode& n = replace_pair(g, t.state, t.node, merged_node(a, b, false, *bindings));
      n.schedule.order = make_order(2, {Dim::J, Dim::I, Dim::K});
      n.schedule.map = {true, true, false};
      keep_valid_forwarding(n);
      if (!schedule_validity(n, g, n.schedule).ok) return false;
      add_caches(n, g, wanted);
      return true;
    }
    case XKind::ThreadLevelFusion: {
      if (!(ba.interval == bb.interval) || !x.all_zero) return false;
      StencilNode& n = replace_pair(g, t.state, t.node, merged_node(a, b, true, *bindings));
      keep_valid_forwarding(n);
      n.schedule = default_schedule(n, g, false);
      if (!schedule_validity(n, g, n.schedule).ok) return false;
      keep_valid_forwarding(n);
      add_caches(n, g, wanted);
      return true;
    }
    case XKind::RedundantComputeFusion: {
      if (ba.policy != Policy::Parallel || !(ba.interval == bb.interval)) return false;
      if (!x.any || x.all_zero || !x.all_flat) return false;
      StencilNode& n = replace_pair(g, t.state, t.node, merged_node(a, b, true, *bindings));
      n.schedule.order = make_order(1, {Dim::K, Dim::J, Dim::I});
      n.schedule.map = {true, true, true};
      keep_valid_forwarding(n);
      if (!schedule_validity(n, g, n.schedule).ok) return false;
      // Intermediates now live in per-plane scratch where possible.
      for (const auto& f : cache_candidates(n, g)) {
        const CacheKind k = feasible_cache(n, g, n.schedule, f);
        if (k != CacheKind::None) wanted[f] = k;
      }
      add_caches(n, g, wanted);
      return true;
    }
    default:
      return false;
  }
}

bool has_field(const StencilNode& n, const std::string& f) {
  return n.reads().count(f) || n.writes().count(f);
}

bool elide_temporary(DataflowGraph& g, StencilNode& n, const std::string& f) {
  if (!has_field(n, f) || n.schedule.cache_of(f) != CacheKind::None) return false;
  Schedule s = n.schedule;
  s.caches[f] = CacheKind::Local;
  if (!schedule_validity(n, g, s).ok) return false;
  n.schedule = s;
  return true;
}

bool eliminate_load(DataflowGraph& g, StencilNode& n, const std::string& f) {
  if (!has_field(n, f) || n.forwarded.count(f) || n.schedule.cache_of(f) != CacheKind::None) return false;
  if (!forward_ok(n, n.schedule.region, f)) return false;
  n.forwarded.insert(f);
  return schedule_validity(n, g, n.schedule).ok;
}

bool cache_carried(StencilNode& n, const std::string& f) {
  if (!n.vertical() || n.carried.count(f) || !n.writes().count(f)) return false;
  if (n.schedule.cache_of(f) != CacheKind::None) return false;
  bool vertical_read = false;
  for (const auto& b : n.blocks)
    for (const auto& s : b.statements)
      for (const auto& [rf, o] : field_reads(s.value))
        if (rf == f && o.horizontal_zero() && o.dk != 0) vertical_read = true;
  if (!vertical_read) return false;
  n.carried.insert(f);
  return true;
}

bool rewrite_node_powers(StencilNode& n) {
  int count = 0;
  for (auto& b : n.blocks)
    for (auto& s : b.statements) count += rewrite_powers(s.value);
  return count > 0;
}

// Schedule with split regions, keeping what stays valid.
bool use_split(DataflowGraph& g, StencilNode& n) {
  Schedule s = n.schedule;
  s.region = RegionStrategy::Split;
  s.caches.clear();
  if (!schedule_validity(n, g, s).ok) {
    const Schedule keep = n.schedule;
    n.schedule.region = RegionStrategy::Split;
    s = default_schedule(n, g, false);
    n.schedule = keep;
    if (!schedule_validity(n, g, s).ok) return false;
  }
  const auto wanted = n.schedule.caches;
  n.schedule = s;
  add_caches(n, g, wanted);
  return true;
}

bool split_regions(DataflowGraph& g, StencilNode& n) {
  if (!n.has_regions() || n.schedule.region == RegionStrategy::Split) return false;
  return use_split(g, n);
}

bool prune_regions(DataflowGraph& g, int state, int node) {
  auto& nodes = g.states[std::size_t(state)].nodes;
  StencilNode& n = nodes[std::size_t(node)];
  if (!n.has_regions()) return false;
  bool removed = false;
  for (std::size_t b = 0; b < n.blocks.size();) {
    auto& stmts = n.blocks[b].statements;
    auto& boxes = n.boxes[b];
    for (std::size_t s = 0; s < stmts.size();) {
      if (stmts[s].region && boxes[s].empty()) {
        stmts.erase(stmts.begin() + long(s));
        boxes.erase(boxes.begin() + long(s));
        removed = true;
      } else {
        ++s;
      }
    }
    if (stmts.empty()) {
      n.blocks.erase(n.blocks.begin() + long(b));
      n.boxes.erase(n.boxes.begin() + long(b));
    } else {
      ++b;
    }
  }
  if (n.blocks.empty()) {
    nodes.erase(nodes.begin() + node);
    return true;
  }
  keep_valid_forwarding(n);
  for (auto it = n.carried.begin(); it != n.carried.end();)
    it = n.writes().count(*it) ? std::next(it) : n.carried.erase(it);
  if (!n.has_regions()) {
    n.schedule.region = RegionStrategy::Predicated;
    if (!schedule_validity(n, g, n.schedule).ok) n.schedule = default_schedule(n, g, false);
    return removed;
  }
  if (n.schedule.region == RegionStrategy::Split) {
    if (!schedule_validity(n, g, n.schedule).ok) n.schedule = default_schedule(n, g, false);
    return removed;
  }
  const bool split = use_split(g, n);
  if (!schedule_validity(n, g, n.schedule).ok) n.schedule = default_schedule(n, g, false);
  return removed || split;
}

// Attempts the rewrite in place; false means the precondition does not hold
// (the graph may then be partially modified).
bool rewrite(DataflowGraph& g, const Transformation& t) {
  check_location(g, t);
  switch (t.kind) {
    case XKind::ConstantPropagation:
      if (!constant_propagation_changes(g)) return false;
      constant_propagation(g);
      return true;
    case XKind::DeadBranchElimination:
      if (!dead_branches_present(g)) return false;
      dead_branch_elimination(g);
      return true;
    case XKind::LoopUnroll:
      if (!loop_unrollable(g, t.loop)) return false;
      loop_unroll(g, t.loop);
      return true;
    default:
      break;
  }
  if (pair_level(t.kind)) {
    if (!fuse(g, t)) return false;
    auto& st = g.states[std::size_t(t.state)];
    rebuild_memlets(st.nodes[std::size_t(t.node)], g);
    rebuild_edges(st);
    return true;
  }
  if (t.kind == XKind::RegionPrune) {
    if (!prune_regions(g, t.state, t.node)) return false;
    auto& st = g.states[std::size_t(t.state)];
    for (auto& n : st.nodes) rebuild_memlets(n, g);
    rebuild_edges(st);
    return true;
  }
  StencilNode& n = g.states[std::size_t(t.state)].nodes[std::size_t(t.node)];
  bool ok = false;
  switch (t.kind) {
    case XKind::LocalTemporaryElision: ok = elide_temporary(g, n, t.field); break;
    case XKind::DeadLoadElimination: ok = eliminate_load(g, n, t.field); break;
    case XKind::CarriedValueCaching: ok = cache_carried(n, t.field); break;
    case XKind::PowerRewrite: ok = rewrite_node_powers(n); break;
    case XKind::RegionSplit: ok = split_regions(g, n); break;
    default: break;
  }
  if (!ok) return false;
  rebuild_memlets(n, g);
  rebuild_edges(g.states[std::size_t(t.state)]);
  return true;
}

// ---- power rewriting ----

std::optional<double> exponent_of(const Expr& e) {
  bool named = false;
  visit(e, [&](const Expr& x) {
    if (x.kind != ExprKind::Literal && x.kind != ExprKind::Unary && x.kind != ExprKind::Binary) named = true;
  });
  if (named) return std::nullopt;
  const Expr f = fold(e, [](const std::string&) { return std::nullopt; });
  if (!f.is_literal()) return std::nullopt;
  const double v = f.value;
  if (v == 0.5) return v;
  if (std::floor(v) == v && v >= -8 && v <= 8) return v;
  return std::nullopt;
}

bool rewritable(const Expr& e) {
  return e.kind == ExprKind::Binary && e.bop == BinaryOp::Pow && exponent_of(e.args[1]).has_value();
}

Expr product(const Expr& x, int n) {
  Expr p = x;
  for (int i = 1; i < n; ++i) p = Expr::binary(BinaryOp::Mul, p, x);
  return p;
}

}  // namespace

int count_rewritable_powers(const Expr& e) {
  int n = 0;
  visit(e, [&](const Expr& x) { n += rewritable(x) ? 1 : 0; });
  return n;
}

int rewrite_powers(Expr& e) {
  int n = 0;
  for (auto& a : e.args) n += rewrite_powers(a);
  if (!rewritable(e)) return n;
  const double p = *exponent_of(e.args[1]);
  const Expr base = e.args[0];
  const SourceLoc loc = e.loc;
  if (p == 0.5) {
    e = Expr::call(Builtin::Sqrt, {base});
  } else if (p == 0) {
    e = Expr::literal(1, true);
  } else if (p > 0) {
    e = product(base, int(p));
  } else {
    e = Expr::binary(BinaryOp::Div, Expr::literal(1, true), product(base, int(-p)));
  }
  e.loc = loc;
  return n + 1;
}

const char* xkind_name(XKind k) {
  for (const auto& [kind, name] : kKinds)
    if (kind == k) return name;
  return "?";
}

XKind xkind_from_name(const std::string& name) {
  for (const auto& [kind, n] : kKinds)
    if (name == n) return kind;
  throw Error("config", "unknown transformation kind '" + name + "'");
}

const std::vector<XKind>& all_xkinds() {
  static const std::vector<XKind> kinds = [] {
    std::vector<XKind> out;
    for (const auto& [k, n] : kKinds) out.push_back(k);
    return out;
  }();
  return kinds;
}

std::string Transformation::describe() const {
  std::ostringstream os;
  os << xkind_name(kind);
  if (state >= 0) os << " s" << state;
  if (node >= 0) os << " n" << node;
  if (!field.empty()) os << " " << field;
  if (loop >= 0) os << " loop" << loop;
  return os.str();
}

bool can_apply(const DataflowGraph& graph, const Transformation& t) {
  check_location(graph, t);
  DataflowGraph copy = graph;
  return rewrite(copy, t);
}

void apply(DataflowGraph& graph, const Transformation& t) {
  if (t.version != graph.version)
    throw Error("stale transformation", t.describe() + " was matched on graph version " +
                                            std::to_string(t.version) + ", graph is at " +
                                            std::to_string(graph.version));
  DataflowGraph copy = graph;
  if (!rewrite(copy, t)) throw Error("transform", t.describe() + " does not apply");
  for (const auto& st : copy.states)
    for (const auto& n : st.nodes) {
      const auto v = schedule_validity(n, copy, n.schedule);
      if (!v.ok) throw InternalError(t.describe() + " left node " + n.name + " with an invalid schedule: " + v.reason);
    }
  const auto diags = validate_graph(copy);
  if (!diags.empty()) throw InternalError(t.describe() + " produced an invalid graph: " + diags[0].message);
  copy.version = graph.version + 1;
  graph = std::move(copy);
}

std::vector<Transformation> list_applicable(const DataflowGraph& g) {
  std::vector<Transformation> out;
  auto offer = [&](Transformation t) {
    t.version = g.version;
    if (can_apply(g, t)) out.push_back(std::move(t));
  };
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    const auto& nodes = g.states[s].nodes;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto& node = nodes[n];
      if (n + 1 < nodes.size())
        for (XKind k : {XKind::IntervalFusion, XKind::ThreadLevelFusion, XKind::RedundantComputeFusion})
          offer({k, int(s), int(n), "", -1, 0});
      std::set<std::string> fields = node.reads();
      for (const auto& w : node.writes()) fields.insert(w);
      for (const auto& f : fields) {
        const auto* c = g.find_container(f);
        if (c && c->transient) offer({XKind::LocalTemporaryElision, int(s), int(n), f, -1, 0});
        offer({XKind::DeadLoadElimination, int(s), int(n), f, -1, 0});
        if (node.vertical()) offer({XKind::CarriedValueCaching, int(s), int(n), f, -1, 0});
      }
      bool pow = false;
      for (const auto& b : node.blocks)
        for (const auto& st : b.statements) pow = pow || count_rewritable_powers(st.value) > 0;
      if (pow) offer({XKind::PowerRewrite, int(s), int(n), "", -1, 0});
      if (node.has_regions()) {
        offer({XKind::RegionSplit, int(s), int(n), "", -1, 0});
        offer({XKind::RegionPrune, int(s), int(n), "", -1, 0});
      }
    }
  }
  offer({XKind::ConstantPropagation, -1, -1, "", -1, 0});
  offer({XKind::DeadBranchElimination, -1, -1, "", -1, 0});
  for (std::size_t l = 0; l < g.loops.size(); ++l) offer({XKind::LoopUnroll, -1, -1, "", int(l), 0});
  return out;
}

nlohmann::json transformation_to_json(const Transformation& t) {
  nlohmann::json j;
  j["kind"] = xkind_name(t.kind);
  nlohmann::json loc = nlohmann::json::object();
  if (t.state >= 0) loc["state"] = t.state;
  if (t.node >= 0) loc["node"] = t.node;
  j["location"] = loc;
  nlohmann::json params = nlohmann::json::object();
  if (!t.field.empty()) params["field"] = t.field;
  if (t.loop >= 0) params["loop"] = t.loop;
  j["params"] = params;
  j["version"] = t.version;
  return j;
}

Transformation transformation_from_json(const nlohmann::json& j) {
  Transformation t;
  t.kind = xkind_from_name(j.at("kind").get<std::string>());
  const auto& loc = j.at("location");
  t.state = loc.value("state", -1);
  t.node = loc.value("node", -1);
  const auto& params = j.at("params");
  t.field = params.value("field", std::string());
  t.loop = params.value("loop", -1);
  t.version = j.value("version", std::uint64_t(0));
  return t;
}

}  // namespace sf
