#include "sf/exec/reference.hpp"

#include <cmath>
#include <cstring>

#include "sf/frontend/extents.hpp"
#include "sf/frontend/validate.hpp"

namespace sf {

RefProgram reference_program(const StencilProgram& program, const Domain& domain) {
  require_valid(program);
  const Geometry geo = analyze_geometry(program, domain);
  RefProgram out;
  out.domain = domain;
  for (const auto& f : program.fields)
    out.arrays.push_back({f.name, f.has_k, f.element, f.temporary, geo.fields.at(f.name)});

  std::map<std::string, double> env;
  for (const auto& c : program.configs) env[c.name] = c.value;
  for (const auto& [k, v] : default_params(program)) env[k] = v;

  for (const auto& call : resolve_driver(program)) {
    const StencilDef* s = program.find_stencil(call.stencil);
    RefCall rc;
    rc.name = s->name;
    rc.blocks = s->blocks;
    for (std::size_t b = 0; b < s->blocks.size(); ++b) {
      std::vector<Box> row;
      for (std::size_t st = 0; st < s->blocks[b].statements.size(); ++st)
        row.push_back(geo.box(program, s->name, int(b), int(st), domain));
      rc.boxes.push_back(std::move(row));
    }
    rc.params = env;
    for (const auto& [k, v] : call.params) rc.params[k] = v;
    out.calls.push_back(std::move(rc));
  }
  return out;
}

RefProgram reference_program(const DataflowGraph& graph) {
  RefProgram out;
  out.domain = graph.domain;
  out.arrays = graph.arrays;
  for (const auto& e : unrolled_trace(graph)) {
    const auto& n = graph.states[std::size_t(e.state)].nodes[std::size_t(e.node)];
    out.calls.push_back({n.name, n.blocks, n.boxes, e.params});
  }
  return out;
}

std::int64_t DenseField::index(std::int64_t i, std::int64_t j, std::int64_t k) const {
  const std::int64_t ni = shape.r[0].length();
  const std::int64_t nj = shape.r[1].length();
  const std::int64_t kk = has_k ? k - shape.r[2].lo : 0;
  return (kk * nj + (j - shape.r[1].lo)) * ni + (i - shape.r[0].lo);
}

DenseSet reference_inputs(const RefProgram& program, std::uint64_t seed) {
  DenseSet out;
  for (const auto& c : program.arrays) {
    DenseField f;
    f.shape = c.shape_box(program.domain);
    f.has_k = c.has_k;
    f.element = c.element;
    f.transient = c.transient;
    f.data.assign(std::size_t(f.shape.volume()), 0.0);
    if (!c.transient)
      for (auto k = f.shape.r[2].lo; k < f.shape.r[2].hi; ++k)
        for (auto j = f.shape.r[1].lo; j < f.shape.r[1].hi; ++j)
          for (auto i = f.shape.r[0].lo; i < f.shape.r[0].hi; ++i) {
            const double v = input_value(seed, c.name, i, j, k);
            f.at(i, j, k) = c.element == ElementType::Float32 ? double(float(v)) : v;
          }
    out.emplace(c.name, std::move(f));
  }
  return out;
}

namespace {

// Expression tree with names and fields resolved for one call.
struct RNode {
  ExprKind kind = ExprKind::Literal;
  double value = 0.0;
  DenseField* field = nullptr;
  const std::string* field_name = nullptr;
  Offset offset;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  Builtin fn = Builtin::Sqrt;
  std::vector<RNode> args;
};

struct Ctx {
  int call = 0;
  int block = 0;
  const RefObserver* observer = nullptr;
};

RNode resolve(const Expr& e, DenseSet& fields, const std::map<std::string, double>& params) {
  RNode n;
  n.kind = e.kind;
  n.value = e.value;
  n.offset = e.offset;
  n.uop = e.uop;
  n.bop = e.bop;
  n.fn = e.fn;
  switch (e.kind) {
    case ExprKind::Name: {
      auto it = params.find(e.name);
      if (it == params.end()) throw Error("unknown name", "no value for scalar '" + e.name + "'", e.loc);
      n.kind = ExprKind::Literal;
      n.value = it->second;
      break;
    }
    case ExprKind::FieldRef: {
      auto it = fields.find(e.name);
      if (it == fields.end()) throw Error("undeclared field", "no storage for '" + e.name + "'", e.loc);
      n.field = &it->second;
      n.field_name = &it->first;
      break;
    }
    case ExprKind::Index:
      throw Error("unknown name", "indexing inside a stencil", e.loc);
    default:
      break;
  }
  for (const auto& a : e.args) n.args.push_back(resolve(a, fields, params));
  return n;
}

double eval(const RNode& n, std::int64_t i, std::int64_t j, std::int64_t k, const Ctx& ctx) {
  switch (n.kind) {
    case ExprKind::Literal:
    case ExprKind::Name:
    case ExprKind::Index:
      return n.value;
    case ExprKind::FieldRef: {
      const std::int64_t idx = n.field->index(i + n.offset.di, j + n.offset.dj, k + n.offset.dk);
      if (ctx.observer) (*ctx.observer)(ctx.call, ctx.block, *n.field_name, idx, false);
      return n.field->data[std::size_t(idx)];
    }
    case ExprKind::Unary:
      return apply_unary(n.uop, eval(n.args[0], i, j, k, ctx));
    case ExprKind::Binary:
      return apply_binary(n.bop, eval(n.args[0], i, j, k, ctx), eval(n.args[1], i, j, k, ctx));
    case ExprKind::Call: {
      const double a = eval(n.args[0], i, j, k, ctx);
      const double b = n.args.size() > 1 ? eval(n.args[1], i, j, k, ctx) : 0.0;
      return apply_builtin(n.fn, a, b);
    }
    case ExprKind::Select: {
      // both arms are read, like a tasklet with all its inputs connected
      const double c = eval(n.args[0], i, j, k, ctx);
      const double a = eval(n.args[1], i, j, k, ctx);
      const double b = eval(n.args[2], i, j, k, ctx);
      return c != 0.0 ? a : b;
    }
  }
  return 0.0;
}

}  // namespace

RefStats run_reference(const RefProgram& program, DenseSet& fields, const RefObserver* observer) {
  RefStats stats;
  for (std::size_t c = 0; c < program.calls.size(); ++c) {
    const auto& call = program.calls[c];
    for (std::size_t b = 0; b < call.blocks.size(); ++b) {
      const auto& blk = call.blocks[b];
      std::vector<RNode> exprs;
      std::vector<std::pair<DenseField*, const std::string*>> targets;
      for (const auto& st : blk.statements) {
        exprs.push_back(resolve(st.value, fields, call.params));
        auto it = fields.find(st.target);
        if (it == fields.end()) throw Error("undeclared field", "no storage for '" + st.target + "'", st.loc);
        targets.emplace_back(&it->second, &it->first);
      }
      const Range kr = blk.interval.resolve(program.domain.nk);
      const bool down = blk.policy == Policy::Backward;
      const Ctx ctx{int(c), int(b), observer};
      for (std::int64_t n = 0; n < kr.length(); ++n) {
        const std::int64_t k = down ? kr.hi - 1 - n : kr.lo + n;
        for (std::size_t s = 0; s < blk.statements.size(); ++s) {
          const Box& box = call.boxes[b][s];
          if (box.empty() || k < box.r[2].lo || k >= box.r[2].hi) continue;
          DenseField& out = *targets[s].first;
          for (auto j = box.r[1].lo; j < box.r[1].hi; ++j)
            for (auto i = box.r[0].lo; i < box.r[0].hi; ++i) {
              double v = eval(exprs[s], i, j, k, ctx);
              if (out.element == ElementType::Float32) v = double(float(v));
              if (!std::isfinite(v)) ++stats.nonfinite;
              const std::int64_t idx = out.index(i, j, k);
              if (observer) (*observer)(int(c), int(b), *targets[s].second, idx, true);
              out.data[std::size_t(idx)] = v;
            }
        }
      }
    }
  }
  return stats;
}

namespace {

struct Differ {
  Comparison result;
  void add(const std::string& name, double a, double b) {
    std::uint64_t x, y;
    std::memcpy(&x, &a, 8);
    std::memcpy(&y, &b, 8);
    if (x == y) return;
    if (std::isnan(a) && std::isnan(b)) return;
    result.bitwise = false;
    double rel;
    if (std::isnan(a) || std::isnan(b))
      rel = INFINITY;
    else {
      const double scale = std::max(std::fabs(a), std::fabs(b));
      rel = scale == 0.0 ? 0.0 : std::fabs(a - b) / scale;
    }
    if (rel > result.max_rel || result.worst.empty()) {
      result.max_rel = std::max(result.max_rel, rel);
      result.worst = name;
    }
  }
};

}  // namespace

Comparison compare(const DenseSet& expected, const FieldSet& actual, const DataflowGraph& graph) {
  Differ d;
  for (const auto& c : graph.arrays) {
    if (c.transient) continue;
    const auto& e = expected.at(c.name);
    const auto& a = actual.at(c.name);
    const Box b = c.shape_box(graph.domain);
    for (auto k = b.r[2].lo; k < b.r[2].hi; ++k)
      for (auto j = b.r[1].lo; j < b.r[1].hi; ++j)
        for (auto i = b.r[0].lo; i < b.r[0].hi; ++i) d.add(c.name, e.at(i, j, k), a.get(i, j, k));
  }
  return d.result;
}

Comparison compare(const FieldSet& expected, const FieldSet& actual, const DataflowGraph& graph) {
  Differ d;
  for (const auto& c : graph.arrays) {
    if (c.transient) continue;
    const auto& e = expected.at(c.name);
    const auto& a = actual.at(c.name);
    const Box b = c.shape_box(graph.domain);
    for (auto k = b.r[2].lo; k < b.r[2].hi; ++k)
      for (auto j = b.r[1].lo; j < b.r[1].hi; ++j)
        for (auto i = b.r[0].lo; i < b.r[0].hi; ++i) d.add(c.name, e.get(i, j, k), a.get(i, j, k));
  }
  return d.result;
}

}  // namespace sf
