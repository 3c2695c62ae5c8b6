#include "sf/ir/expand.hpp"

#include <algorithm>
#include <sstream>

namespace sf {

namespace {

Box hull_of(const Box& a, const Box& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  Box h;
  for (int d = 0; d < 3; ++d)
    h.r[std::size_t(d)] = {std::min(a.r[std::size_t(d)].lo, b.r[std::size_t(d)].lo),
                           std::max(a.r[std::size_t(d)].hi, b.r[std::size_t(d)].hi)};
  return h;
}

std::vector<PlanLevel> nest(const DimOrder& order, const Schedule& s) {
  std::vector<PlanLevel> out;
  for (Dim d : spatial_order(order))
    if (s.tile_of(d) > 0) out.push_back({PlanLevel::Kind::Tile, d, true, s.tile_of(d)});
  for (SDim d : order) {
    if (d == SDim::Operation) continue;
    if (d == SDim::Interval) {
      out.push_back({PlanLevel::Kind::Group, Dim::I, false, 0});
      continue;
    }
    const Dim dim = d == SDim::K ? Dim::K : d == SDim::J ? Dim::J : Dim::I;
    out.push_back({PlanLevel::Kind::Spatial, dim, s.is_map(dim), 0});
  }
  return out;
}

}  // namespace

KernelPlan expand(const StencilNode& node, const DataflowGraph& graph) {
  const Validity v = schedule_validity(node, graph, node.schedule);
  if (!v.ok) throw Error("invalid schedule", "node '" + node.name + "': " + v.reason);

  KernelPlan plan;
  plan.schedule = node.schedule;
  plan.sections = node_sections(node, node.schedule.region);
  // A predicated region statement sweeps the whole interior; its region only
  // masks the points that do work.
  const bool predicated = node.schedule.region == RegionStrategy::Predicated;
  for (const auto& sec : plan.sections) {
    Box h;
    for (int s : sec.stmts) {
      const Box& b = node.boxes[std::size_t(sec.block)][std::size_t(s)];
      h = hull_of(h, b);
      if (predicated && node.blocks[std::size_t(sec.block)].statements[std::size_t(s)].region &&
          !b.r[2].empty()) {
        Box full = b;
        full.r[0] = {0, graph.domain.ni};
        full.r[1] = {0, graph.domain.nj};
        h = hull_of(h, full);
      }
    }
    plan.section_hulls.push_back(h);
  }

  const auto sp = spatial_order(node.schedule.order);
  const DimOrder row_order = make_order(2, sp);
  const bool row_ok = order_respects_dependences(node, graph, row_order, node.schedule.map,
                                                 node.schedule.region);

  // The innermost spatial dimension runs as a row (statement-major) when it is
  // a map. A group placed after it is moved just before it when that is legal.
  auto finish = [&](PlanPhase& ph) {
    const DimOrder declared = ph.split ? make_order(0, sp) : node.schedule.order;
    const bool after = group_position(declared) == 3;
    ph.declared = nest(declared, node.schedule);
    ph.vectorized = node.schedule.is_map(sp[2]) && (!after || row_ok);
    ph.levels = nest(ph.vectorized && after ? row_order : declared, node.schedule);
    for (std::size_t l = 0; l < ph.levels.size(); ++l)
      if (ph.levels[l].map) {
        ph.parallel = int(l);
        break;
      }
    ph.k_dir = 1;
    for (int s : ph.sections)
      if (node.blocks[std::size_t(plan.sections[std::size_t(s)].block)].policy == Policy::Backward)
        ph.k_dir = -1;
    for (const int s : ph.sections) ph.hull = hull_of(ph.hull, plan.section_hulls[std::size_t(s)]);
    plan.phases.push_back(ph);
  };

  PlanPhase run;
  for (std::size_t s = 0; s < plan.sections.size(); ++s) {
    if (plan.sections[s].split) {
      if (!run.sections.empty()) finish(run);
      run = {};
      PlanPhase own;
      own.split = true;
      own.sections = {int(s)};
      finish(own);
      continue;
    }
    run.sections.push_back(int(s));
  }
  if (!run.sections.empty()) finish(run);
  return plan;
}

namespace {

// Outermost map scopes of one nest; the group replicates what follows it.
int count_nest(const std::vector<PlanLevel>& levels, std::size_t sections) {
  int replicas = 1;
  for (const auto& l : levels) {
    if (l.map) return replicas;
    if (l.kind == PlanLevel::Kind::Group) replicas = int(sections);
  }
  return 0;
}

}  // namespace

int kernel_count(const KernelPlan& plan) {
  int n = 0;
  for (const auto& ph : plan.phases) {
    std::size_t live = 0;
    for (int s : ph.sections)
      if (!plan.section_hulls[std::size_t(s)].empty()) ++live;
    if (live) n += count_nest(ph.declared, live);
  }
  return n;
}

int kernel_count(const DataflowGraph& graph) {
  int n = 0;
  for (const auto& st : graph.states)
    for (const auto& node : st.nodes) n += kernel_count(expand(node, graph));
  return n;
}

std::int64_t worker_iterations(const KernelPlan& plan) {
  std::int64_t total = 0;
  for (const auto& ph : plan.phases) {
    std::array<bool, 3> inside{false, false, false};
    bool after_group = false;
    for (const auto& l : ph.levels) {
      if (l.kind == PlanLevel::Kind::Group) after_group = true;
      if (l.kind == PlanLevel::Kind::Spatial) inside[std::size_t(l.dim)] = after_group;
    }
    for (int s : ph.sections) {
      const Box& h = plan.section_hulls[std::size_t(s)];
      if (h.empty()) continue;
      std::int64_t pts = h.r[2].length();
      for (int d = 0; d < 2; ++d) pts *= (inside[std::size_t(d)] ? h : ph.hull).r[std::size_t(d)].length();
      total += pts;
    }
  }
  return total;
}

std::string describe_plan(const StencilNode& node, const KernelPlan& plan) {
  std::ostringstream os;
  os << node.name << " [" << plan.schedule.describe() << "]\n";
  for (std::size_t p = 0; p < plan.phases.size(); ++p) {
    const auto& ph = plan.phases[p];
    os << "  phase " << p << (ph.split ? " (split)" : "") << (ph.vectorized ? " rows" : "") << "\n";
    std::string pad = "    ";
    for (const auto& l : ph.declared) {
      switch (l.kind) {
        case PlanLevel::Kind::Tile:
          os << pad << "map tile " << dim_name(l.dim) << " by " << l.tile << "\n";
          break;
        case PlanLevel::Kind::Spatial:
          os << pad << (l.map ? "map " : "loop ") << dim_name(l.dim) << " ["
             << ph.hull.r[std::size_t(l.dim)].lo << ", " << ph.hull.r[std::size_t(l.dim)].hi << ")\n";
          break;
        case PlanLevel::Kind::Group:
          os << pad << "sections";
          for (int s : ph.sections) os << " " << s;
          os << "\n";
          break;
      }
      pad += "  ";
    }
    for (int s : ph.sections) {
      const auto& sec = plan.sections[std::size_t(s)];
      for (int st : sec.stmts) {
        const auto& stmt = node.blocks[std::size_t(sec.block)].statements[std::size_t(st)];
        os << pad << "tasklet " << stmt.target << " = " << to_string(stmt.value);
        const CacheKind c = plan.schedule.cache_of(stmt.target);
        if (c != CacheKind::None) os << "  (" << cache_name(c) << ")";
        os << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace sf
