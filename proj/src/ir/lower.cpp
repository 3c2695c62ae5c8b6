#include <algorithm>

#include "sf/frontend/validate.hpp"
#include "sf/ir/graph.hpp"
#include "sf/sched/validity.hpp"

namespace sf {

namespace {

struct Cursor {
  int state = 0;
  bool open = true;  // the state may still receive calls
  Expr cond = Expr::literal(1, true);
  std::vector<std::pair<std::string, Expr>> pending;

  bool clean() const { return open && pending.empty() && cond.is_literal() && cond.value != 0; }
};

class Lowering {
 public:
  Lowering(const StencilProgram& p, const Domain& d) : prog_(p), geo_(analyze_geometry(p, d)) {
    g_.domain = d;
    g_.configs = p.configs;
    g_.params = p.params;
    for (const auto& f : p.fields) {
      Container c{f.name, f.has_k, f.element, f.temporary, geo_.fields.at(f.name)};
      for (int k = 0; k < 3; ++k) {
        const int n = k == 2 ? (f.has_k ? d.nk : 1) : d.size(Dim(k));
        if (-c.halo.lo[k] > n || c.halo.hi[k] > n)
          throw Error("lowering error",
                      "domain is smaller than the halo reach of field '" + f.name + "' along " +
                          dim_name(Dim(k)),
                      f.loc);
      }
      g_.arrays.push_back(c);
    }
  }

  DataflowGraph run() {
    g_.states.push_back({"s0", {}, {}});
    Cursor cur;
    cur = body(prog_.driver, cur);
    if (!cur.clean() && !(cur.cond.is_literal() && cur.cond.value != 0 && cur.pending.empty())) {
      const int s = add_state();
      link(cur, s);
    }
    rebuild_all(g_);
    for (auto& st : g_.states)
      for (auto& n : st.nodes) n.schedule = default_schedule(n, g_, false);
    return std::move(g_);
  }

 private:
  int add_state() {
    g_.states.push_back({"s" + std::to_string(g_.states.size()), {}, {}});
    return int(g_.states.size()) - 1;
  }

  void link(const Cursor& from, int to) {
    g_.transitions.push_back({from.state, to, from.cond, from.pending});
  }

  // Moves the cursor to a fresh state reached through its pending edge.
  Cursor advance(const Cursor& cur, bool open) {
    const int s = add_state();
    link(cur, s);
    return Cursor{s, open, Expr::literal(1, true), {}};
  }

  Cursor body(const std::vector<DriverStmt>& stmts, Cursor cur) {
    for (const auto& d : stmts) {
      switch (d.kind) {
        case DriverStmt::Kind::Call: {
          if (!cur.clean()) cur = advance(cur, true);
          add_call(d, cur.state);
          break;
        }
        case DriverStmt::Kind::Assign:
          cur.pending.emplace_back(d.name, d.value);
          cur.open = false;
          break;
        case DriverStmt::Kind::For: {
          cur.pending.emplace_back(d.name, Expr::literal(0, true));
          Cursor guard = advance(cur, false);
          LoopInfo loop;
          loop.var = d.name;
          loop.guard = guard.state;
          loop.trip = d.value;
          loop.unroll = d.unroll;
          const Expr in_range = Expr::binary(BinaryOp::Lt, Expr::make_name(d.name), d.value);
          const std::size_t first_body = g_.states.size();
          Cursor b{guard.state, false, in_range, {}};
          b = body(d.body, b);
          Expr next = Expr::binary(BinaryOp::Add, Expr::make_name(d.name), Expr::literal(1, true));
          b.pending.emplace_back(d.name, next);
          link(b, guard.state);
          for (std::size_t s = first_body; s < g_.states.size(); ++s) loop.body.push_back(int(s));
          Cursor exit{guard.state, false, Expr::unary(UnaryOp::Not, in_range), {}};
          cur = advance(exit, true);
          loop.exit = cur.state;
          g_.loops.push_back(std::move(loop));
          break;
        }
        case DriverStmt::Kind::If: {
          Cursor branch = advance(cur, false);
          Cursor t{branch.state, false, d.value, {}};
          t = body(d.body, t);
          Cursor e{branch.state, false, Expr::unary(UnaryOp::Not, d.value), {}};
          e = body(d.orelse, e);
          const int join = add_state();
          link(t, join);
          link(e, join);
          cur = Cursor{join, true, Expr::literal(1, true), {}};
          break;
        }
      }
    }
    return cur;
  }

  void add_call(const DriverStmt& d, int state) {
    const StencilDef* s = prog_.find_stencil(d.name);
    if (!s) throw Error("unknown stencil", "call to undefined stencil '" + d.name + "'", d.loc);
    for (std::size_t bi = 0; bi < s->blocks.size(); ++bi) {
      StencilNode n;
      n.name = s->name + "_" + std::to_string(bi);
      n.members = {n.name};
      n.blocks = {s->blocks[bi]};
      n.blocks[0].computation = 0;
      std::vector<Box> boxes;
      for (std::size_t si = 0; si < s->blocks[bi].statements.size(); ++si)
        boxes.push_back(geo_.box(prog_, s->name, int(bi), int(si), g_.domain));
      n.boxes = {boxes};
      n.bindings = d.args;
      g_.states[std::size_t(state)].nodes.push_back(std::move(n));
    }
  }

  const StencilProgram& prog_;
  Geometry geo_;
  DataflowGraph g_;
};

}  // namespace

DataflowGraph lower(const StencilProgram& program, const Domain& domain) {
  if (domain.ni < 1 || domain.nj < 1 || domain.nk < 1)
    throw Error("lowering error", "domain sizes must be positive");
  require_valid(program);
  return Lowering(program, domain).run();
}

void assign_default_schedules(DataflowGraph& graph) {
  for (auto& st : graph.states)
    for (auto& n : st.nodes) n.schedule = default_schedule(n, graph, true);
  ++graph.version;
}

}  // namespace sf
