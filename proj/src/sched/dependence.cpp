#include <algorithm>

#include "sf/sched/validity.hpp"

namespace sf {

namespace {

int direction(Policy p) { return p == Policy::Backward ? -1 : 1; }

bool joins_section(const std::vector<const Statement*>& section, const Statement& s) {
  for (const Statement* t : section) {
    for (const auto& [f, o] : field_reads(s.value))
      if (f == t->target && !o.horizontal_zero()) return false;
    for (const auto& [f, o] : field_reads(t->value))
      if (f == s.target && !o.horizontal_zero()) return false;
  }
  return true;
}

struct Access {
  int block;
  int stmt;
  Offset offset;
  bool write;
};

}  // namespace

std::vector<Section> node_sections(const StencilNode& node, RegionStrategy strategy) {
  std::vector<Section> out;
  for (std::size_t b = 0; b < node.blocks.size(); ++b) {
    const auto& stmts = node.blocks[b].statements;
    std::vector<const Statement*> cur;
    Section sec;
    sec.block = int(b);
    for (std::size_t s = 0; s < stmts.size(); ++s) {
      bool fits = !cur.empty() && joins_section(cur, stmts[s]);
      if (fits && strategy == RegionStrategy::Split && cur.front()->region != stmts[s].region) fits = false;
      if (!fits && !cur.empty()) {
        out.push_back(sec);
        cur.clear();
        sec.stmts.clear();
      }
      if (cur.empty()) sec.split = strategy == RegionStrategy::Split && stmts[s].region.has_value();
      cur.push_back(&stmts[s]);
      sec.stmts.push_back(int(s));
    }
    if (!cur.empty()) out.push_back(sec);
  }
  return out;
}

std::vector<Dependence> node_dependences(const StencilNode& node, const DataflowGraph& graph) {
  std::map<std::string, std::vector<Access>> by_field;
  for (std::size_t b = 0; b < node.blocks.size(); ++b)
    for (std::size_t s = 0; s < node.blocks[b].statements.size(); ++s) {
      const auto& st = node.blocks[b].statements[s];
      if (node.boxes[b][s].empty()) continue;
      for (const auto& [f, o] : field_reads(st.value)) by_field[f].push_back({int(b), int(s), o, false});
      by_field[st.target].push_back({int(b), int(s), {}, true});
    }

  std::vector<Dependence> deps;
  for (const auto& [field, acc] : by_field) {
    const auto* c = graph.find_container(field);
    const bool ij = c && !c->has_k;
    for (const auto& w : acc) {
      if (!w.write) continue;
      for (const auto& x : acc) {
        if (x.write && (x.block < w.block || (x.block == w.block && x.stmt <= w.stmt))) continue;
        // x touches the cell p + x.offset at its point p; w writes it at point p + x.offset.
        std::vector<int> k_signs;  // possible values of (k_w - k_x)
        if (!ij) {
          k_signs = {x.offset.dk};
        } else {
          const Range kw = node.boxes[std::size_t(w.block)][std::size_t(w.stmt)].r[2];
          const Range kx = node.boxes[std::size_t(x.block)][std::size_t(x.stmt)].r[2];
          bool lt = false, eq = false, gt = false;
          for (auto a = kw.lo; a < kw.hi; ++a)
            for (auto bb = kx.lo; bb < kx.hi; ++bb) {
              lt = lt || a < bb;
              eq = eq || a == bb;
              gt = gt || a > bb;
            }
          if (lt) k_signs.push_back(-1);
          if (eq) k_signs.push_back(0);
          if (gt) k_signs.push_back(1);
        }
        for (int dk : k_signs) {
          // Reference order: block, then level in the block's direction, then statement.
          int order = 0;  // <0: w first, >0: x first
          if (w.block != x.block) {
            order = w.block < x.block ? -1 : 1;
          } else {
            const int dir = direction(node.blocks[std::size_t(w.block)].policy);
            const int lvl = dir * dk;  // dir * (k_w - k_x)
            if (lvl != 0)
              order = lvl < 0 ? -1 : 1;
            else if (w.stmt != x.stmt)
              order = w.stmt < x.stmt ? -1 : 1;
          }
          if (order == 0) continue;  // read of the own target at the same instance
          const Offset wx{-x.offset.di, -x.offset.dj, -dk};  // x point minus w point
          Dependence d;
          d.field = field;
          d.ij_field = ij;
          if (order < 0) {
            d.first_block = w.block;
            d.first_stmt = w.stmt;
            d.second_block = x.block;
            d.second_stmt = x.stmt;
            d.delta = wx;
          } else {
            d.first_block = x.block;
            d.first_stmt = x.stmt;
            d.second_block = w.block;
            d.second_stmt = w.stmt;
            d.delta = {-wx.di, -wx.dj, -wx.dk};
          }
          deps.push_back(d);
        }
      }
    }
  }
  return deps;
}

namespace {

struct OrderCheck {
  bool ok = true;
  std::string reason;
};

OrderCheck check_order(const StencilNode& node, const std::vector<Dependence>& deps,
                       const std::vector<Section>& secs, const DimOrder& order,
                       const std::array<bool, 3>& map) {
  std::vector<std::vector<int>> pos;
  std::vector<std::vector<int>> sec(node.blocks.size());
  for (std::size_t b = 0; b < node.blocks.size(); ++b) sec[b].assign(node.blocks[b].statements.size(), 0);
  pos.assign(node.blocks.size(), {});
  for (std::size_t b = 0; b < node.blocks.size(); ++b) pos[b].assign(node.blocks[b].statements.size(), 0);
  for (std::size_t s = 0; s < secs.size(); ++s)
    for (std::size_t p = 0; p < secs[s].stmts.size(); ++p) {
      sec[std::size_t(secs[s].block)][std::size_t(secs[s].stmts[p])] = int(s);
      pos[std::size_t(secs[s].block)][std::size_t(secs[s].stmts[p])] = int(p);
    }

  const int kpos = int(std::find(order.begin(), order.end(), SDim::K) - order.begin());
  const int ipos = int(std::find(order.begin(), order.end(), SDim::Interval) - order.begin());
  int common_dir = 0;
  bool mixed = false;
  for (const auto& b : node.blocks) {
    const int d = direction(b.policy);
    if (common_dir == 0) common_dir = d;
    if (d != common_dir) mixed = true;
  }
  if (kpos < ipos && mixed)
    return {false, "K outside Interval requires one vertical direction"};

  for (const auto& d : deps) {
    int decided = 0;
    for (std::size_t p = 0; p < 5 && !decided; ++p) {
      int v = 0;
      bool is_map = false;
      switch (order[p]) {
        case SDim::Interval: v = d.second_block - d.first_block; break;
        case SDim::Operation:
          v = sec[std::size_t(d.second_block)][std::size_t(d.second_stmt)] -
              sec[std::size_t(d.first_block)][std::size_t(d.first_stmt)];
          break;
        case SDim::K: {
          const int dir = kpos > ipos ? direction(node.blocks[std::size_t(d.first_block)].policy) : common_dir;
          v = dir * d.delta.dk;
          is_map = map[std::size_t(Dim::K)];
          break;
        }
        case SDim::J: v = d.delta.dj; is_map = map[std::size_t(Dim::J)]; break;
        case SDim::I: v = d.delta.di; is_map = map[std::size_t(Dim::I)]; break;
      }
      if (v == 0) continue;
      if (is_map)
        return {false, std::string("dependence on '") + d.field + "' carried by map dimension " + sdim_name(order[p])};
      if (v < 0)
        return {false, std::string("dependence on '") + d.field + "' violated along " + sdim_name(order[p])};
      decided = 1;
    }
    if (!decided) {
      const int ds = pos[std::size_t(d.second_block)][std::size_t(d.second_stmt)] -
                     pos[std::size_t(d.first_block)][std::size_t(d.first_stmt)];
      if (ds <= 0) return {false, "dependence on '" + d.field + "' violated within a section"};
    }
  }
  return {};
}

bool accessed_elsewhere(const StencilNode& node, const DataflowGraph& g, const std::string& f) {
  for (const auto& st : g.states)
    for (const auto& n : st.nodes) {
      if (&n == &node) continue;
      if (n.reads().count(f) || n.writes().count(f)) return true;
    }
  return false;
}

Validity local_ok(const StencilNode& node, const DataflowGraph& g, const std::vector<Section>& secs,
                  const std::string& f) {
  const Validity bad{false, "cache visibility violation"};
  const auto* c = g.find_container(f);
  if (!c || !c->transient || accessed_elsewhere(node, g, f)) return bad;
  if (node.forwarded.count(f) || node.carried.count(f)) return bad;
  int home = -1;
  const Box* write_box = nullptr;
  for (std::size_t s = 0; s < secs.size(); ++s) {
    const auto& blk = node.blocks[std::size_t(secs[s].block)];
    for (int si : secs[s].stmts) {
      const auto& st = blk.statements[std::size_t(si)];
      const Box& box = node.boxes[std::size_t(secs[s].block)][std::size_t(si)];
      bool touches = st.target == f;
      for (const auto& [rf, o] : field_reads(st.value)) {
        if (rf != f) continue;
        if (!o.zero()) return bad;
        touches = true;
        if (!write_box || !write_box->contains(box)) return bad;
      }
      if (!touches) continue;
      if (home >= 0 && home != int(s)) return bad;
      home = int(s);
      if (st.target == f) {
        if (!write_box) {
          if (st.region) return bad;
          write_box = &box;
        } else if (!write_box->contains(box)) {
          return bad;
        }
      }
    }
  }
  return home >= 0 ? Validity{} : bad;
}

Validity shared_ok(const StencilNode& node, const DataflowGraph& g, const std::vector<Section>& secs,
                   const Schedule& s, const std::string& f) {
  const auto* c = g.find_container(f);
  if (!c || !c->transient || !c->has_k || accessed_elsewhere(node, g, f))
    return {false, "cache visibility violation"};
  const int gp = group_position(s.order);
  const auto sp = spatial_order(s.order);
  for (int p = 0; p < 3; ++p) {
    const bool before = p < gp;
    if ((sp[std::size_t(p)] == Dim::K) != before)
      return {false, "shared cache needs K outside and J, I inside the Interval/Operation group"};
  }
  int block = -1;
  bool offset_read = false;
  std::vector<std::pair<int, int>> writers;  // (section, stmt) in execution order
  for (std::size_t si = 0; si < secs.size(); ++si) {
    const auto& sec = secs[si];
    const auto& blk = node.blocks[std::size_t(sec.block)];
    for (int st_idx : sec.stmts) {
      const auto& st = blk.statements[std::size_t(st_idx)];
      const Box& box = node.boxes[std::size_t(sec.block)][std::size_t(st_idx)];
      for (const auto& [rf, o] : field_reads(st.value)) {
        if (rf != f) continue;
        if (o.dk != 0) return {false, "shared cache needs zero vertical offsets"};
        if (block >= 0 && block != sec.block) return {false, "shared cache spans several blocks"};
        block = sec.block;
        if (!o.horizontal_zero()) offset_read = true;
        const Box need = access_box(box, o, true);
        bool covered = false;
        for (const auto& [ws, wst] : writers) {
          (void)ws;
          if (node.boxes[std::size_t(sec.block)][std::size_t(wst)].contains(need)) covered = true;
        }
        if (!covered) return {false, "cache visibility violation"};
      }
      if (st.target == f) {
        if (block >= 0 && block != sec.block) return {false, "shared cache spans several blocks"};
        block = sec.block;
        if (!st.region) writers.emplace_back(int(si), st_idx);
      }
    }
  }
  if (!offset_read) return {false, "shared cache without cross-worker reuse"};
  return {};
}

}  // namespace

bool forward_ok(const StencilNode& node, RegionStrategy strategy, const std::string& f) {
  bool any = false;
  for (const auto& sec : node_sections(node, strategy)) {
    const auto& blk = node.blocks[std::size_t(sec.block)];
    std::vector<const Box*> writers;
    for (int si : sec.stmts) {
      const auto& st = blk.statements[std::size_t(si)];
      const Box& box = node.boxes[std::size_t(sec.block)][std::size_t(si)];
      for (const auto& [rf, o] : field_reads(st.value)) {
        if (rf != f || box.empty()) continue;
        if (!o.zero()) return false;
        bool covered = false;
        for (const Box* w : writers) covered = covered || w->contains(box);
        if (!covered) return false;
        any = true;
      }
      if (st.target == f && !st.region) writers.push_back(&box);
    }
  }
  return any;
}

bool order_respects_dependences(const StencilNode& node, const DataflowGraph& graph,
                                const DimOrder& order, const std::array<bool, 3>& map,
                                RegionStrategy strategy) {
  const auto secs = node_sections(node, strategy);
  return check_order(node, node_dependences(node, graph), secs, order, map).ok;
}

Validity schedule_validity(const StencilNode& node, const DataflowGraph& g, const Schedule& s) {
  if (node.vertical() && s.is_map(Dim::K)) return {false, "carried dependency on K"};
  for (const auto& f : node.forwarded)
    if (!forward_ok(node, s.region, f)) return {false, "forwarded value of '" + f + "' crosses sections"};
  const auto secs = node_sections(node, s.region);
  const auto deps = node_dependences(node, g);
  const auto oc = check_order(node, deps, secs, s.order, s.map);
  if (!oc.ok) return {false, oc.reason};

  if (s.region == RegionStrategy::Split) {
    if (!node.has_regions()) return {false, "region split without regions"};
    const auto outer = make_order(0, spatial_order(s.order));
    if (!check_order(node, deps, secs, outer, s.map).ok)
      return {false, "region split conflicts with the dimension order"};
  }

  for (int d = 0; d < 3; ++d) {
    const int t = s.tile[std::size_t(d)];
    if (t == 0) continue;
    if (t < 0) return {false, "negative tile size"};
    if (!s.map[std::size_t(d)]) return {false, "tiling a loop dimension"};
    if (t > g.domain.size(Dim(d))) return {false, "tile larger than the domain"};
    for (const auto& dep : deps)
      if (dep.delta[d] != 0) return {false, std::string("tiling ") + dim_name(Dim(d)) + " splits a dependence"};
  }

  for (const auto& [f, kind] : s.caches) {
    Validity v;
    if (kind == CacheKind::Local) v = local_ok(node, g, secs, f);
    if (kind == CacheKind::Shared) v = shared_ok(node, g, secs, s, f);
    if (!v.ok) return v;
  }
  return {};
}

std::vector<std::string> cache_candidates(const StencilNode& node, const DataflowGraph& g) {
  std::set<std::string> fields = node.reads();
  for (const auto& w : node.writes()) fields.insert(w);
  std::vector<std::string> out;
  for (const auto& f : fields) {
    const auto* c = g.find_container(f);
    if (c && c->transient && !accessed_elsewhere(node, g, f)) out.push_back(f);
  }
  return out;
}

CacheKind feasible_cache(const StencilNode& node, const DataflowGraph& g, const Schedule& s,
                         const std::string& f) {
  const auto secs = node_sections(node, s.region);
  if (local_ok(node, g, secs, f).ok) return CacheKind::Local;
  if (shared_ok(node, g, secs, s, f).ok) return CacheKind::Shared;
  return CacheKind::None;
}

Schedule default_schedule(const StencilNode& node, const DataflowGraph& g, bool with_caches) {
  Schedule s;
  s.region = node.schedule.region;
  if (s.region == RegionStrategy::Split && !node.has_regions()) s.region = RegionStrategy::Predicated;
  if (node.vertical()) {
    s.order = make_order(2, {Dim::J, Dim::I, Dim::K});
    s.map = {true, true, false};
  } else {
    s.order = make_order(0, {Dim::K, Dim::J, Dim::I});
    s.map = {true, true, true};
  }
  if (!schedule_validity(node, g, s).ok) {
    // Fall back to the first valid order, preferring mapped dimensions.
    bool found = false;
    for (int mask = 7; mask >= 0 && !found; --mask) {
      std::array<bool, 3> m{bool(mask & 1), bool(mask & 2), bool(mask & 4)};
      for (const auto& o : all_orders()) {
        Schedule t = s;
        t.order = o;
        t.map = m;
        if (schedule_validity(node, g, t).ok) {
          s = t;
          found = true;
          break;
        }
      }
    }
  }
  if (with_caches) {
    for (const auto& f : cache_candidates(node, g)) {
      const CacheKind k = feasible_cache(node, g, s, f);
      if (k == CacheKind::None) continue;
      Schedule t = s;
      t.caches[f] = k;
      if (schedule_validity(node, g, t).ok) s = t;
    }
  }
  return s;
}

std::vector<Schedule> enumerate_schedules(const StencilNode& node, const DataflowGraph& g,
                                          const ScheduleMenu& menu) {
  std::vector<Schedule> out;
  const auto candidates = cache_candidates(node, g);
  std::vector<RegionStrategy> regions{RegionStrategy::Predicated};
  if (node.has_regions()) regions.push_back(RegionStrategy::Split);

  for (RegionStrategy rs : regions)
    for (const auto& order : all_orders())
      for (int mask = 7; mask >= 0; --mask) {
        Schedule base;
        base.order = order;
        base.map = {bool(mask & 1), bool(mask & 2), bool(mask & 4)};
        base.region = rs;
        if (!schedule_validity(node, g, base).ok) continue;

        // Tile choices per map dimension, each checked on its own first.
        std::array<std::vector<int>, 3> tiles;
        for (int d = 0; d < 3; ++d) {
          for (int t : menu.tiles) {
            if (t != 0 && !base.map[std::size_t(d)]) continue;
            Schedule probe = base;
            probe.tile[std::size_t(d)] = t;
            if (t == 0 || schedule_validity(node, g, probe).ok) tiles[std::size_t(d)].push_back(t);
          }
        }
        std::vector<std::vector<CacheKind>> cache_opts;
        for (const auto& f : candidates) {
          std::vector<CacheKind> opts{CacheKind::None};
          for (CacheKind k : {CacheKind::Local, CacheKind::Shared}) {
            Schedule probe = base;
            probe.caches[f] = k;
            if (schedule_validity(node, g, probe).ok) opts.push_back(k);
          }
          cache_opts.push_back(opts);
        }
        for (int ti : tiles[0])
          for (int tj : tiles[1])
            for (int tk : tiles[2]) {
              std::vector<std::size_t> idx(cache_opts.size(), 0);
              while (true) {
                Schedule s = base;
                s.tile = {ti, tj, tk};
                for (std::size_t c = 0; c < idx.size(); ++c)
                  if (cache_opts[c][idx[c]] != CacheKind::None) s.caches[candidates[c]] = cache_opts[c][idx[c]];
                if (schedule_validity(node, g, s).ok) out.push_back(s);
                std::size_t c = 0;
                while (c < idx.size() && ++idx[c] == cache_opts[c].size()) idx[c++] = 0;
                if (c == idx.size()) break;
              }
            }
      }
  return out;
}

}  // namespace sf
