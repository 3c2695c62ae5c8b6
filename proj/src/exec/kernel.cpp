#include "sf/exec/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace sf {

namespace {

class Compiler {
 public:
  Compiler(const StencilNode& node, const DataflowGraph& graph, CompiledNode& out)
      : node_(node), graph_(graph), out_(out) {}

  void run() {
    std::set<std::string> names = node_.reads();
    for (const auto& w : node_.writes()) names.insert(w);
    for (const auto& n : names) {
      const Container& c = graph_.container(n);
      FieldSlot f;
      f.name = n;
      f.has_k = c.has_k;
      f.element = c.element;
      f.cache = node_.schedule.cache_of(n);
      f.forwarded = node_.forwarded.count(n) > 0;
      f.carried = node_.carried.count(n) > 0;
      if (f.cache == CacheKind::Local || f.forwarded) f.reg = next_reg_++;
      if (f.cache == CacheKind::Shared) {
        f.plane = int(out_.planes.size());
        out_.planes.push_back(plane_of(n));
      }
      if (f.carried) f.carry = out_.carried++;
      slot_[n] = int(out_.fields.size());
      out_.fields.push_back(f);
    }
    fixed_regs_ = next_reg_;
    max_reg_ = next_reg_;

    for (const auto& sec : out_.plan.sections) {
      CompiledSection cs;
      cs.block = sec.block;
      cs.dir = node_.blocks[std::size_t(sec.block)].policy == Policy::Backward ? -1 : 1;
      std::set<std::string> written;
      for (int si : sec.stmts) {
        const auto& st = node_.blocks[std::size_t(sec.block)].statements[std::size_t(si)];
        CompiledStmt c;
        c.box = node_.boxes[std::size_t(sec.block)][std::size_t(si)];
        c.target = slot_.at(st.target);
        free_.clear();
        next_reg_ = fixed_regs_;
        c.result = expr(st.value, c.ops, written);
        written.insert(st.target);
        cs.stmts.push_back(std::move(c));
      }
      out_.sections.push_back(std::move(cs));
    }
    out_.registers = max_reg_;
  }

 private:
  PlaneShape plane_of(const std::string& f) const {
    Box h;
    bool first = true;
    auto add = [&](const Box& b) {
      if (b.empty()) return;
      if (first) {
        h = b;
        first = false;
        return;
      }
      for (int d = 0; d < 2; ++d) {
        h.r[std::size_t(d)].lo = std::min(h.r[std::size_t(d)].lo, b.r[std::size_t(d)].lo);
        h.r[std::size_t(d)].hi = std::max(h.r[std::size_t(d)].hi, b.r[std::size_t(d)].hi);
      }
    };
    for (std::size_t b = 0; b < node_.blocks.size(); ++b)
      for (std::size_t s = 0; s < node_.blocks[b].statements.size(); ++s) {
        const auto& st = node_.blocks[b].statements[s];
        const Box& box = node_.boxes[b][s];
        if (st.target == f) add(box);
        for (const auto& [r, o] : field_reads(st.value))
          if (r == f) add(access_box(box, o, true));
      }
    return {h.r[0], h.r[1]};
  }

  int alloc() {
    if (!free_.empty()) {
      const int r = free_.back();
      free_.pop_back();
      return r;
    }
    max_reg_ = std::max(max_reg_, next_reg_ + 1);
    return next_reg_++;
  }

  void release(const Operand& o) {
    if (!o.scalar && o.index >= fixed_regs_) free_.push_back(o.index);
  }

  Operand scalar(double v) {
    out_.scalars.push_back(v);
    return {true, int(out_.scalars.size()) - 1};
  }

  Operand param(const std::string& name) {
    for (const auto& [slot, n] : out_.params)
      if (n == name) return {true, slot};
    out_.scalars.push_back(0.0);
    const int slot = int(out_.scalars.size()) - 1;
    out_.params.emplace_back(slot, name);
    return {true, slot};
  }

  Operand expr(const Expr& e, std::vector<RowOp>& ops, const std::set<std::string>& written) {
    switch (e.kind) {
      case ExprKind::Literal:
        return scalar(e.value);
      case ExprKind::Name:
        return param(e.name);
      case ExprKind::Index:
        throw Error("unknown name", "indexing inside a stencil", e.loc);
      case ExprKind::FieldRef: {
        const int s = slot_.at(e.name);
        const FieldSlot& f = out_.fields[std::size_t(s)];
        if (f.cache == CacheKind::Local) return {false, f.reg};
        if (f.forwarded && e.offset.zero() && written.count(e.name)) return {false, f.reg};
        RowOp op;
        op.field = s;
        op.offset = e.offset;
        if (f.cache == CacheKind::Shared)
          op.code = RowOp::Code::LoadPlane;
        else if (f.carried && e.offset.horizontal_zero() && e.offset.dk != 0)
          op.code = RowOp::Code::LoadCarried;
        else
          op.code = RowOp::Code::Load;
        op.dst = alloc();
        ops.push_back(op);
        return {false, op.dst};
      }
      case ExprKind::Unary:
      case ExprKind::Binary:
      case ExprKind::Call:
      case ExprKind::Select: {
        std::vector<Operand> args;
        for (const auto& a : e.args) args.push_back(expr(a, ops, written));
        bool all_scalar = true;
        for (const auto& a : args) all_scalar = all_scalar && a.scalar;
        if (all_scalar) {
          // constant subtree: evaluate once per invocation is not possible for
          // params, so materialize through a fill and compute as a row
          RowOp fill;
          fill.code = RowOp::Code::Fill;
          fill.a = args[0];
          fill.dst = alloc();
          ops.push_back(fill);
          args[0] = {false, fill.dst};
        }
        for (const auto& a : args) release(a);
        RowOp op;
        op.uop = e.uop;
        op.bop = e.bop;
        op.fn = e.fn;
        op.a = args[0];
        if (args.size() > 1) op.b = args[1];
        if (args.size() > 2) op.c = args[2];
        op.code = e.kind == ExprKind::Unary    ? RowOp::Code::Unary
                  : e.kind == ExprKind::Binary ? RowOp::Code::Binary
                  : e.kind == ExprKind::Call   ? RowOp::Code::Call
                                               : RowOp::Code::Select;
        if (e.kind == ExprKind::Call && args.size() < 2) op.b = scalar(0.0);
        op.dst = alloc();
        ops.push_back(op);
        return {false, op.dst};
      }
    }
    return scalar(0.0);
  }

  const StencilNode& node_;
  const DataflowGraph& graph_;
  CompiledNode& out_;
  std::map<std::string, int> slot_;
  std::vector<int> free_;
  int next_reg_ = 0;
  int fixed_regs_ = 0;
  int max_reg_ = 0;
};

}  // namespace

CompiledNode compile_node(const StencilNode& node, const DataflowGraph& graph) {
  CompiledNode out;
  out.name = node.name;
  out.plan = expand(node, graph);
  Compiler(node, graph, out).run();
  for (const auto& ph : out.plan.phases) {
    if (!ph.vectorized || ph.hull.empty()) continue;
    Dim row = Dim::I;
    for (const auto& l : ph.levels)
      if (l.kind == PlanLevel::Kind::Spatial) row = l.dim;
    out.row_max = std::max(out.row_max, ph.hull.r[std::size_t(row)].length());
  }
  return out;
}

namespace {

inline double round_to(ElementType t, double v) {
  return t == ElementType::Float32 ? double(float(v)) : v;
}

template <class T>
void load_row(double* dst, const T* src, std::int64_t stride, std::int64_t n) {
  if (stride == 1) {
    for (std::int64_t t = 0; t < n; ++t) dst[t] = double(src[t]);
  } else {
    for (std::int64_t t = 0; t < n; ++t) dst[t] = double(src[t * stride]);
  }
}

template <class T>
void store_row(T* dst, const double* src, std::int64_t stride, std::int64_t n) {
  if (stride == 1) {
    for (std::int64_t t = 0; t < n; ++t) dst[t] = T(src[t]);
  } else {
    for (std::int64_t t = 0; t < n; ++t) dst[t * stride] = T(src[t]);
  }
}

struct Row {
  double* regs;
  std::int64_t width;
  const double* sc;

  double* reg(int r) const { return regs + std::int64_t(r) * width; }
  double at(const Operand& o, std::int64_t t) const { return o.scalar ? sc[o.index] : reg(o.index)[t]; }
};

template <class F>
void map2(const Row& rw, const RowOp& op, std::int64_t s, std::int64_t n, F f) {
  double* d = rw.reg(op.dst) + s;
  if (!op.a.scalar && !op.b.scalar) {
    const double* x = rw.reg(op.a.index) + s;
    const double* y = rw.reg(op.b.index) + s;
    for (std::int64_t t = 0; t < n; ++t) d[t] = f(x[t], y[t]);
  } else if (!op.a.scalar) {
    const double* x = rw.reg(op.a.index) + s;
    const double y = rw.sc[op.b.index];
    for (std::int64_t t = 0; t < n; ++t) d[t] = f(x[t], y);
  } else if (!op.b.scalar) {
    const double x = rw.sc[op.a.index];
    const double* y = rw.reg(op.b.index) + s;
    for (std::int64_t t = 0; t < n; ++t) d[t] = f(x, y[t]);
  } else {
    const double v = f(rw.sc[op.a.index], rw.sc[op.b.index]);
    for (std::int64_t t = 0; t < n; ++t) d[t] = v;
  }
}

}  // namespace

void exec_row(const Invocation& inv, const CompiledSection& sec, WorkerScratch& ws,
              std::vector<std::vector<double>>& planes, const std::array<std::int64_t, 3>& coord,
              int row, std::int64_t lo, std::int64_t hi) {
  const CompiledNode& node = *inv.node;
  const Row rw{ws.regs.data(), node.row_max, inv.scalars.data()};
  for (const auto& st : sec.stmts) {
    const Box& bx = st.box;
    if (bx.empty()) continue;
    bool inside = true;
    for (int d = 0; d < 3; ++d)
      if (d != row && (coord[std::size_t(d)] < bx.r[std::size_t(d)].lo || coord[std::size_t(d)] >= bx.r[std::size_t(d)].hi))
        inside = false;
    if (!inside) continue;
    const std::int64_t a = std::max(lo, bx.r[std::size_t(row)].lo);
    const std::int64_t b = std::min(hi, bx.r[std::size_t(row)].hi);
    if (a >= b) continue;
    const std::int64_t s = a - lo;
    const std::int64_t n = b - a;
    std::array<std::int64_t, 3> cell = coord;
    cell[std::size_t(row)] = a;

    // Plain field-to-field copy: skip the register row.
    if (st.ops.size() == 1 && st.ops[0].code == RowOp::Code::Load && !st.result.scalar &&
        st.result.index == st.ops[0].dst) {
      const RowOp& op = st.ops[0];
      const FieldSlot& from = node.fields[std::size_t(op.field)];
      const FieldSlot& to = node.fields[std::size_t(st.target)];
      if (from.element == ElementType::Float64 && to.element == ElementType::Float64 && from.cache == CacheKind::None &&
          to.cache == CacheKind::None && !to.forwarded && !to.carried &&
          inv.buffers[std::size_t(op.field)] != inv.buffers[std::size_t(st.target)]) {
        const FieldBuffer& src = *inv.buffers[std::size_t(op.field)];
        FieldBuffer& dst = *inv.buffers[std::size_t(st.target)];
        const double* p = src.f64() + src.layout().index(cell[0] + op.offset.di, cell[1] + op.offset.dj,
                                                         cell[2] + op.offset.dk);
        double* q = dst.f64() + dst.layout().index(cell[0], cell[1], cell[2]);
        const std::int64_t ps = src.layout().strides[std::size_t(row)];
        const std::int64_t qs = dst.layout().strides[std::size_t(row)];
        if (ps == 1 && qs == 1)
          std::memcpy(q, p, std::size_t(n) * sizeof(double));
        else
          for (std::int64_t t = 0; t < n; ++t) q[t * qs] = p[t * ps];
        continue;
      }
    }

    for (const RowOp& op : st.ops) {
      switch (op.code) {
        case RowOp::Code::Load:
        case RowOp::Code::LoadCarried: {
          const FieldSlot& f = node.fields[std::size_t(op.field)];
          const std::int64_t ci = cell[0] + op.offset.di;
          const std::int64_t cj = cell[1] + op.offset.dj;
          const std::int64_t ck = cell[2] + op.offset.dk;
          double* d = rw.reg(op.dst) + s;
          if (op.code == RowOp::Code::LoadCarried && inv.use_carried && n == 1) {
            const auto& tag = ws.carry_cell[std::size_t(f.carry)];
            if (tag[0] == ci && tag[1] == cj && tag[2] == ck) {
              d[0] = ws.carry_value[std::size_t(f.carry)];
              break;
            }
          }
          const FieldBuffer& buf = *inv.buffers[std::size_t(op.field)];
          const Layout& L = buf.layout();
          const std::int64_t idx = L.index(ci, cj, ck);
          const std::int64_t stride = L.strides[std::size_t(row)];
          if (f.element == ElementType::Float64)
            load_row(d, buf.f64() + idx, stride, n);
          else
            load_row(d, buf.f32() + idx, stride, n);
          break;
        }
        case RowOp::Code::LoadPlane: {
          const FieldSlot& f = node.fields[std::size_t(op.field)];
          const PlaneShape& ps = node.planes[std::size_t(f.plane)];
          const std::int64_t pni = ps.i.length();
          const double* p = planes[std::size_t(f.plane)].data() + (cell[1] + op.offset.dj - ps.j.lo) * pni +
                            (cell[0] + op.offset.di - ps.i.lo);
          load_row(rw.reg(op.dst) + s, p, row == 0 ? 1 : pni, n);
          break;
        }
        case RowOp::Code::Fill: {
          double* d = rw.reg(op.dst) + s;
          const double v = rw.sc[op.a.index];
          for (std::int64_t t = 0; t < n; ++t) d[t] = v;
          break;
        }
        case RowOp::Code::Unary: {
          double* d = rw.reg(op.dst) + s;
          const double* x = rw.reg(op.a.index) + s;
          if (op.uop == UnaryOp::Neg)
            for (std::int64_t t = 0; t < n; ++t) d[t] = -x[t];
          else
            for (std::int64_t t = 0; t < n; ++t) d[t] = apply_unary(op.uop, x[t]);
          break;
        }
        case RowOp::Code::Binary:
          switch (op.bop) {
            case BinaryOp::Add: map2(rw, op, s, n, [](double x, double y) { return x + y; }); break;
            case BinaryOp::Sub: map2(rw, op, s, n, [](double x, double y) { return x - y; }); break;
            case BinaryOp::Mul: map2(rw, op, s, n, [](double x, double y) { return x * y; }); break;
            case BinaryOp::Div: map2(rw, op, s, n, [](double x, double y) { return x / y; }); break;
            case BinaryOp::Pow: map2(rw, op, s, n, [](double x, double y) { return std::pow(x, y); }); break;
            default: {
              const BinaryOp bop = op.bop;
              map2(rw, op, s, n, [bop](double x, double y) { return apply_binary(bop, x, y); });
            }
          }
          break;
        case RowOp::Code::Call:
          if (op.fn == Builtin::Sqrt && !op.a.scalar) {
            double* d = rw.reg(op.dst) + s;
            const double* x = rw.reg(op.a.index) + s;
            for (std::int64_t t = 0; t < n; ++t) d[t] = std::sqrt(x[t]);
          } else {
            const Builtin fn = op.fn;
            map2(rw, op, s, n, [fn](double x, double y) { return apply_builtin(fn, x, y); });
          }
          break;
        case RowOp::Code::Select: {
          double* d = rw.reg(op.dst) + s;
          for (std::int64_t t = 0; t < n; ++t)
            d[t] = rw.at(op.a, s + t) != 0.0 ? rw.at(op.b, s + t) : rw.at(op.c, s + t);
          break;
        }
      }
    }

    // store
    const FieldSlot& f = node.fields[std::size_t(st.target)];
    const double* src;
    if (st.result.scalar) {
      double* tmp = rw.reg(node.registers) + s;  // spare row
      for (std::int64_t t = 0; t < n; ++t) tmp[t] = rw.sc[st.result.index];
      src = tmp;
    } else {
      src = rw.reg(st.result.index) + s;
    }
    if (f.cache == CacheKind::Local) {
      double* d = rw.reg(f.reg) + s;
      for (std::int64_t t = 0; t < n; ++t) d[t] = round_to(f.element, src[t]);
      continue;
    }
    if (f.cache == CacheKind::Shared) {
      const PlaneShape& ps = node.planes[std::size_t(f.plane)];
      const std::int64_t pni = ps.i.length();
      double* p = planes[std::size_t(f.plane)].data() + (cell[1] - ps.j.lo) * pni + (cell[0] - ps.i.lo);
      const std::int64_t stride = row == 0 ? 1 : pni;
      for (std::int64_t t = 0; t < n; ++t) p[t * stride] = round_to(f.element, src[t]);
      continue;
    }
    FieldBuffer& buf = *inv.buffers[std::size_t(st.target)];
    const Layout& L = buf.layout();
    const std::int64_t idx = L.index(cell[0], cell[1], cell[2]);
    const std::int64_t stride = L.strides[std::size_t(row)];
    if (f.element == ElementType::Float64)
      store_row(buf.f64() + idx, src, stride, n);
    else
      store_row(buf.f32() + idx, src, stride, n);
    if (f.forwarded) {
      double* d = rw.reg(f.reg) + s;
      for (std::int64_t t = 0; t < n; ++t) d[t] = round_to(f.element, src[t]);
    }
    if (f.carried && inv.use_carried && n == 1) {
      ws.carry_value[std::size_t(f.carry)] = round_to(f.element, src[0]);
      ws.carry_cell[std::size_t(f.carry)] = cell;
    }
  }
}

}  // namespace sf
