#include "sf/frontend/extents.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <tuple>

namespace sf {

namespace {

constexpr std::int64_t kFar = std::int64_t(1) << 40;

std::int64_t bound_value(const AxisBound& b, int n, bool owns_start, bool owns_end) {
  if (b.anchor == AxisBound::Anchor::Start) return owns_start ? b.offset : -kFar + b.offset;
  return owns_end ? n - 1 + b.offset : kFar + b.offset;
}

std::int64_t clamp_far(std::int64_t v, Range base) {
  if (v <= -kFar / 2) return base.lo;
  if (v >= kFar / 2) return base.hi;
  return v;
}

void hull(std::optional<Box>& acc, const Box& b) {
  if (b.empty()) return;
  if (!acc) {
    acc = b;
    return;
  }
  for (int d = 0; d < 3; ++d) {
    acc->r[d].lo = std::min(acc->r[d].lo, b.r[d].lo);
    acc->r[d].hi = std::max(acc->r[d].hi, b.r[d].hi);
  }
}

}  // namespace

void Extent::merge(const Extent& o) {
  for (int d = 0; d < 3; ++d) {
    lo[d] = std::min(lo[d], o.lo[d]);
    hi[d] = std::max(hi[d], o.hi[d]);
  }
}

bool Extent::zero() const { return lo == std::array<int, 3>{} && hi == std::array<int, 3>{}; }

Extent extent_of(const Box& box, const Domain& domain) {
  Extent e;
  if (box.empty()) return e;
  for (int d = 0; d < 3; ++d) {
    e.lo[d] = int(std::min<std::int64_t>(0, box.r[d].lo));
    e.hi[d] = int(std::max<std::int64_t>(0, box.r[d].hi - domain.size(Dim(d))));
  }
  return e;
}

Range resolve_axis(const AxisConstraint& c, Range base, int n, bool owns_start, bool owns_end) {
  if (c.full) return base;
  Range r = base;
  if (c.lo) r.lo = clamp_far(bound_value(*c.lo, n, owns_start, owns_end), base);
  if (c.hi) r.hi = clamp_far(bound_value(*c.hi, n, owns_start, owns_end), base);
  return r;
}

Box statement_box(const Statement& st, const Interval& iv, const Extent& compute, const Domain& d) {
  Box b;
  b.r[0] = {compute.lo[0], d.ni + compute.hi[0]};
  b.r[1] = {compute.lo[1], d.nj + compute.hi[1]};
  b.r[2] = iv.resolve(d.nk);
  if (st.region) {
    b.r[0] = resolve_axis(st.region->i, b.r[0], d.ni, d.west, d.east);
    b.r[1] = resolve_axis(st.region->j, b.r[1], d.nj, d.south, d.north);
  }
  return b;
}

Box access_box(const Box& box, const Offset& o, bool has_k) {
  Box out = box;
  if (box.empty()) return Box{};
  out.r[0].lo += o.di;
  out.r[0].hi += o.di;
  out.r[1].lo += o.dj;
  out.r[1].hi += o.dj;
  if (has_k) {
    out.r[2].lo += o.dk;
    out.r[2].hi += o.dk;
  } else {
    out.r[2] = {0, 1};
  }
  return out;
}

Box Geometry::box(const StencilProgram& p, const std::string& stencil, int block, int stmt,
                  const Domain& d) const {
  const auto* s = p.find_stencil(stencil);
  const auto& b = s->blocks.at(std::size_t(block));
  return statement_box(b.statements.at(std::size_t(stmt)), b.interval,
                       compute.at(stencil).at(std::size_t(block)).at(std::size_t(stmt)), d);
}

Geometry analyze_geometry(const StencilProgram& prog, const Domain& dom) {
  Geometry g;
  for (const auto& s : prog.stencils) {
    auto& c = g.compute[s.name];
    for (const auto& b : s.blocks) c.emplace_back(b.statements.size());
  }
  const auto calls = resolve_driver(prog);

  std::map<std::string, std::optional<Box>> touched;
  std::set<std::tuple<std::string, int, int>> seeded;
  for (int pass = 0;; ++pass) {
    if (pass > 16) throw Error("extent", "compute extents do not converge (unbounded halo growth)");
    const auto before = g.compute;
    std::map<std::string, std::optional<Box>> need;
    touched.clear();

    for (auto call = calls.rbegin(); call != calls.rend(); ++call) {
      const auto* s = prog.find_stencil(call->stencil);
      if (!s) continue;
      auto& ext = g.compute[s->name];
      for (int bi = int(s->blocks.size()) - 1; bi >= 0; --bi) {
        const auto& b = s->blocks[std::size_t(bi)];
        // Statements of a vertical solver may feed earlier statements at the
        // next level; iterate the block until the need sets settle.
        for (int round = 0; round < 8; ++round) {
          bool grew = false;
          for (int si = int(b.statements.size()) - 1; si >= 0; --si) {
            const auto& st = b.statements[std::size_t(si)];
            const FieldDecl* target = prog.find_field(st.target);
            Extent& e = ext[std::size_t(bi)][std::size_t(si)];
            // A temporary is computed exactly where it is read, which may
            // leave out part of the interior.
            if (target && target->temporary && need[st.target]) {
              const Box& nb = *need[st.target];
              Extent want;
              for (int d = 0; d < 2; ++d) {
                want.lo[d] = int(nb.r[d].lo);
                want.hi[d] = int(nb.r[d].hi - dom.size(Dim(d)));
              }
              if (seeded.insert({s->name, bi, si}).second)
                e = want;
              else
                e.merge(want);
            }
            const Box box = statement_box(st, b.interval, e, dom);
            if (box.empty()) continue;
            hull(touched[st.target], access_box(box, {}, !target || target->has_k));
            for (const auto& [f, o] : field_reads(st.value)) {
              const FieldDecl* fd = prog.find_field(f);
              const Box rb = access_box(box, o, !fd || fd->has_k);
              hull(touched[f], rb);
              auto& n = need[f];
              const auto old = n;
              hull(n, rb);
              if (!old || old->r[0].lo != n->r[0].lo || old->r[0].hi != n->r[0].hi ||
                  old->r[1].lo != n->r[1].lo || old->r[1].hi != n->r[1].hi)
                grew = true;
            }
          }
          if (!grew && round > 0) break;
        }
      }
    }
    if (g.compute == before && pass > 0) break;
  }

  for (const auto& f : prog.fields) {
    Extent e;
    if (auto it = touched.find(f.name); it != touched.end() && it->second)
      e = extent_of(*it->second, Domain{dom.ni, dom.nj, f.has_k ? dom.nk : 1});
    if (!f.has_k) e.lo[2] = e.hi[2] = 0;
    g.fields[f.name] = e;
  }
  return g;
}

std::map<std::string, Extent> infer_extents(const StencilProgram& program, const Domain& domain) {
  return analyze_geometry(program, domain).fields;
}

}  // namespace sf
