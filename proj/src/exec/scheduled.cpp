#include "sf/exec/scheduled.hpp"

#include <chrono>
#include <limits>

namespace sf {

WorkerPool::WorkerPool(int workers) : workers_(workers) {
  if (workers < 1) throw Error("executor", "worker count must be at least 1");
  for (int id = 1; id < workers; ++id) threads_.emplace_back([this, id] { loop(id); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard<std::mutex> lk(mu_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::loop(int id) {
  std::uint64_t seen = 0;
  for (;;) {
    std::unique_lock<std::mutex> lk(mu_);
    wake_.wait(lk, [&] { return stop_ || generation_ != seen; });
    if (stop_) return;
    seen = generation_;
    ++active_;
    while (next_ < chunks_) {
      const int c = next_++;
      lk.unlock();
      (*job_)(id, c);
      lk.lock();
    }
    if (--active_ == 0) done_.notify_all();
  }
}

void WorkerPool::run(int chunks, const std::function<void(int, int)>& fn) {
  if (workers_ == 1 || chunks <= 1) {
    for (int c = 0; c < chunks; ++c) fn(0, c);
    return;
  }
  std::unique_lock<std::mutex> lk(mu_);
  job_ = &fn;
  chunks_ = chunks;
  next_ = 0;
  ++generation_;
  ++active_;
  wake_.notify_all();
  while (next_ < chunks_) {
    const int c = next_++;
    lk.unlock();
    fn(0, c);
    lk.lock();
  }
  --active_;
  done_.wait(lk, [&] { return active_ == 0; });
  job_ = nullptr;
  chunks_ = 0;
}

Executor::Executor(const DataflowGraph& graph, int workers)
    : graph_(graph), pool_(std::make_unique<WorkerPool>(workers)), trace_(unrolled_trace(graph)) {
  scratch_.resize(std::size_t(workers));
}

Executor::~Executor() = default;

const CompiledNode& Executor::compiled(int state, int node) {
  auto& slot = cache_[{state, node}];
  if (!slot)
    slot = std::make_unique<CompiledNode>(
        compile_node(graph_.states.at(std::size_t(state)).nodes.at(std::size_t(node)), graph_));
  return *slot;
}

void Executor::run(FieldSet& fields, std::vector<NodeTiming>* timings) {
  std::map<std::pair<int, int>, int> seen;
  for (const auto& e : trace_) {
    const auto t0 = std::chrono::steady_clock::now();
    run_node(e.state, e.node, e.params, fields);
    const auto t1 = std::chrono::steady_clock::now();
    if (timings) {
      const int inst = seen[{e.state, e.node}]++;
      timings->push_back({e.state, e.node, inst,
                          graph_.states[std::size_t(e.state)].nodes[std::size_t(e.node)].name,
                          std::chrono::duration<double>(t1 - t0).count()});
    }
  }
}

void Executor::run_node(int state, int node, const std::map<std::string, double>& params, FieldSet& fields) {
  const CompiledNode& cn = compiled(state, node);
  Invocation inv;
  inv.node = &cn;
  for (const auto& f : cn.fields) {
    auto it = fields.find(f.name);
    if (it == fields.end()) throw Error("executor", "no buffer for field '" + f.name + "'");
    inv.buffers.push_back(&it->second);
  }
  inv.scalars = cn.scalars;
  for (const auto& [slot, name] : cn.params) {
    auto it = params.find(name);
    if (it == params.end()) throw Error("unknown name", "no value for scalar '" + name + "' in " + cn.name);
    inv.scalars[std::size_t(slot)] = it->second;
  }
  for (auto& ws : scratch_) {
    const std::size_t need = std::size_t(cn.registers + 1) * std::size_t(cn.row_max);
    if (ws.regs.size() < need) ws.regs.assign(need, 0.0);
    ws.carry_value.assign(std::size_t(cn.carried), 0.0);
    ws.planes.resize(std::max(ws.planes.size(), cn.planes.size()));
    for (std::size_t p = 0; p < cn.planes.size(); ++p) {
      const std::size_t sz = std::size_t(cn.planes[p].i.length() * cn.planes[p].j.length());
      if (ws.planes[p].size() < sz) ws.planes[p].assign(sz, 0.0);
    }
  }
  for (const auto& ph : cn.plan.phases) exec_phase(inv, ph);
}

namespace {

constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::min();

struct Ctx {
  std::array<std::int64_t, 3> coord{0, 0, 0};
  std::array<bool, 3> fixed{false, false, false};
  std::array<Range, 3> tile{Range{kNone, -(kNone + 1)}, Range{kNone, -(kNone + 1)}, Range{kNone, -(kNone + 1)}};
  int section = -1;
  int worker = 0;
};

Range meet(Range a, Range b) { return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)}; }

struct Walk {
  const Invocation& inv;
  const CompiledNode& cn;
  const PlanPhase& ph;
  WorkerPool& pool;
  std::vector<WorkerScratch>& scratch;
  int row_level = -1;  // index of the row level when vectorized
  int row_dim = 0;
  bool private_planes = false;

  std::vector<std::vector<double>>& planes(int worker) {
    return scratch[std::size_t(private_planes ? worker : 0)].planes;
  }

  template <class F>
  void split(Range r, bool parallel, const Ctx& ctx, F body) {
    if (!parallel || pool.size() == 1) {
      body(ctx, r);
      return;
    }
    const std::int64_t len = r.length();
    const int chunks = int(std::min<std::int64_t>(pool.size(), len));
    pool.run(chunks, [&](int w, int c) {
      Ctx local = ctx;
      local.worker = w;
      body(local, Range{r.lo + len * c / chunks, r.lo + len * (c + 1) / chunks});
    });
  }

  void go(std::size_t L, const Ctx& ctx) {
    if (L == ph.levels.size()) {
      const auto& sec = cn.sections[std::size_t(ctx.section)];
      exec_row(inv, sec, scratch[std::size_t(ctx.worker)], planes(ctx.worker), ctx.coord, row_dim,
               ctx.coord[std::size_t(row_dim)], ctx.coord[std::size_t(row_dim)] + 1);
      return;
    }
    const PlanLevel& lv = ph.levels[L];
    const bool par = int(L) == ph.parallel;
    switch (lv.kind) {
      case PlanLevel::Kind::Group:
        for (int s : ph.sections) {
          const Box& h = cn.plan.section_hulls[std::size_t(s)];
          if (h.empty()) continue;
          bool live = true;
          for (int d = 0; d < 3; ++d)
            if (ctx.fixed[std::size_t(d)] && (ctx.coord[std::size_t(d)] < h.r[std::size_t(d)].lo ||
                                              ctx.coord[std::size_t(d)] >= h.r[std::size_t(d)].hi))
              live = false;
          if (!live) continue;
          Ctx next = ctx;
          next.section = s;
          go(L + 1, next);
        }
        return;
      case PlanLevel::Kind::Tile: {
        const std::size_t d = std::size_t(lv.dim);
        const Range r = meet(ph.hull.r[d], ctx.tile[d]);
        if (r.empty()) return;
        const std::int64_t tiles = (r.length() + lv.tile - 1) / lv.tile;
        split(Range{0, tiles}, par, ctx, [&](const Ctx& c, Range tr) {
          for (std::int64_t t = tr.lo; t < tr.hi; ++t) {
            Ctx next = c;
            next.tile[d] = Range{r.lo + t * lv.tile, std::min(r.hi, r.lo + (t + 1) * lv.tile)};
            go(L + 1, next);
          }
        });
        return;
      }
      case PlanLevel::Kind::Spatial: {
        const std::size_t d = std::size_t(lv.dim);
        const Box& h = ctx.section >= 0 ? cn.plan.section_hulls[std::size_t(ctx.section)] : ph.hull;
        const Range r = meet(h.r[d], ctx.tile[d]);
        if (r.empty()) return;
        if (int(L) == row_level) {
          split(r, par, ctx, [&](const Ctx& c, Range rr) {
            if (rr.empty()) return;
            exec_row(inv, cn.sections[std::size_t(c.section)], scratch[std::size_t(c.worker)], planes(c.worker),
                     c.coord, int(d), rr.lo, rr.hi);
          });
          return;
        }
        int dir = 1;
        if (lv.dim == Dim::K) dir = ctx.section >= 0 ? cn.sections[std::size_t(ctx.section)].dir : ph.k_dir;
        split(r, par, ctx, [&](const Ctx& c, Range rr) {
          Ctx next = c;
          next.fixed[d] = true;
          for (std::int64_t n = 0; n < rr.length(); ++n) {
            next.coord[d] = dir > 0 ? rr.lo + n : rr.hi - 1 - n;
            go(L + 1, next);
          }
        });
        return;
      }
    }
  }
};

}  // namespace

void Executor::exec_phase(const Invocation& base, const PlanPhase& ph) {
  if (ph.hull.empty()) return;
  const CompiledNode& cn = *base.node;
  Walk w{base, cn, ph, *pool_, scratch_};
  int group_level = -1;
  for (std::size_t l = 0; l < ph.levels.size(); ++l) {
    if (ph.levels[l].kind == PlanLevel::Kind::Group) group_level = int(l);
    if (ph.levels[l].kind == PlanLevel::Kind::Spatial) {
      w.row_dim = int(ph.levels[l].dim);
      if (ph.vectorized) w.row_level = int(l);
    }
  }
  w.private_planes = ph.parallel >= 0 && ph.parallel < group_level;

  Invocation inv = base;
  const PlanLevel& last = ph.levels.back();
  inv.use_carried = !ph.vectorized && last.kind == PlanLevel::Kind::Spatial && last.dim == Dim::K && !last.map;
  for (auto& ws : scratch_)
    ws.carry_cell.assign(std::size_t(cn.carried), {kNone, kNone, kNone});
  Walk walk{inv, cn, ph, *pool_, scratch_, w.row_level, w.row_dim, w.private_planes};
  walk.go(0, Ctx{});
}

}  // namespace sf
