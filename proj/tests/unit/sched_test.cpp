#include <algorithm>

#include "doctest.h"
#include "helpers.hpp"
#include "sf/sched/layout.hpp"
#include "sf/sched/validity.hpp"
#include "sf/xform/transforms.hpp"

using namespace sf;

namespace {

const char* kPointwiseChain = R"(field inp: float64[I, J, K]
field out: float64[I, J, K]
temp tmp: float64[I, J, K]

stencil s1:
    with computation(PARALLEL), interval(...):
        tmp = 2.0 * inp

stencil s2:
    with computation(PARALLEL), interval(...):
        out = tmp + 1.0

driver:
    s1()
    s2()
)";

DataflowGraph fused(const char* src, XKind kind) {
  auto g = test::graph_of(src, {8, 8, 4});
  for (const auto& t : list_applicable(g))
    if (t.kind == kind) {
      apply(g, t);
      return g;
    }
  throw std::runtime_error("fusion not applicable");
}

}  // namespace

TEST_CASE("layout: ni 8, halo 3, alignment 8") {
  const Layout l = allocate_layout(true, Extent{{-3, 0, 0}, {3, 0, 0}}, Domain{8, 1, 1}, 8);
  CHECK(l.shape[0] == 14);
  CHECK(l.strides[1] == 16);
  CHECK(l.pre_pad == 5);
  CHECK(l.index(0, 0, 0) % 8 == 0);
}

TEST_CASE("layout: no halo, alignment 1 is dense") {
  const Layout l = allocate_layout(true, Extent{}, Domain{5, 3, 2}, 1);
  CHECK(l.pre_pad == 0);
  CHECK(l.strides == std::array<std::int64_t, 3>{1, 5, 15});
  CHECK(l.size == 30);
}

TEST_CASE("layout: 2D field has no K stride") {
  const Layout l = allocate_layout(false, Extent{{-1, 0, 0}, {1, 0, 0}}, Domain{8, 4, 6}, 8);
  CHECK(l.strides[2] == 0);
  CHECK(l.shape[2] == 1);
  for (int j = 0; j < 4; ++j) CHECK(l.index(0, j, 0) % 8 == 0);
}

TEST_CASE("layout alignment holds for every row start") {
  for (int ni = 1; ni <= 64; ++ni)
    for (int h = 0; h <= 4; ++h)
      for (int a : {1, 2, 4, 8, 16}) {
        const Layout l = allocate_layout(true, Extent{{-h, -h, 0}, {h, h, 0}}, Domain{ni, 3, 2}, a);
        bool ok = l.strides[1] >= l.shape[0];
        for (int k = 0; k < 2; ++k)
          for (int j = -h; j < 3 + h; ++j) {
            ok = ok && l.index(0, j, k) % a == 0;
            // halo cells stay inside the allocation
            ok = ok && l.index(-h, j, k) >= 0 && l.index(ni + h - 1, j, k) < l.size;
          }
        CAPTURE(ni);
        CAPTURE(h);
        CAPTURE(a);
        CHECK(ok);
      }
}

TEST_CASE("default schedules") {
  SUBCASE("horizontal") {
    const auto g = test::graph_of(test::kThreePoint, {8, 8, 4});
    const Schedule s = default_schedule(g.states[0].nodes[0], g);
    CHECK(s.order == make_order(0, {Dim::K, Dim::J, Dim::I}));
    CHECK(s.map == std::array<bool, 3>{true, true, true});
  }
  SUBCASE("forward solver") {
    const auto g = test::graph_of(test::kCumsum, {8, 8, 4});
    const Schedule s = default_schedule(g.states[0].nodes[0], g);
    CHECK(order_string(s.order) == "J,I,Interval,Operation,K");
    CHECK_FALSE(s.is_map(Dim::K));
  }
  SUBCASE("single-point temporary gets a local cache") {
    const auto g = fused(kPointwiseChain, XKind::ThreadLevelFusion);
    REQUIRE(g.states[0].nodes.size() == 1);
    const Schedule s = default_schedule(g.states[0].nodes[0], g);
    CHECK(s.cache_of("tmp") == CacheKind::Local);
  }
}

TEST_CASE("schedule validity") {
  SUBCASE("forward solver with K mapped") {
    const auto g = test::graph_of(test::kCumsum, {8, 8, 4});
    Schedule s = default_schedule(g.states[0].nodes[0], g);
    s.map[std::size_t(Dim::K)] = true;
    const auto v = schedule_validity(g.states[0].nodes[0], g, s);
    CHECK_FALSE(v.ok);
    CHECK(v.reason == "carried dependency on K");
  }
  SUBCASE("copy is valid in any order") {
    const auto g = test::graph_of(test::kCopy, {8, 8, 4});
    for (const auto& o : all_orders()) {
      Schedule s;
      s.order = o;
      CHECK(schedule_validity(g.states[0].nodes[0], g, s).ok);
    }
  }
  SUBCASE("cross-worker temporary in a local cache") {
    const auto g = fused(test::kChain, XKind::RedundantComputeFusion);
    REQUIRE(g.states[0].nodes.size() == 1);
    Schedule s = g.states[0].nodes[0].schedule;
    s.caches["tmp"] = CacheKind::Local;
    const auto v = schedule_validity(g.states[0].nodes[0], g, s);
    CHECK_FALSE(v.ok);
    CHECK(v.reason == "cache visibility violation");
  }
}

TEST_CASE("enumerate_schedules") {
  SUBCASE("copy: nothing rejected") {
    const auto g = test::graph_of(test::kCopy, {8, 8, 4});
    const ScheduleMenu menu;
    // 24 orders x 8 map masks x tile choices on mapped dims; tiles larger
    // than the domain are left out
    const std::array<int, 3> n{8, 8, 4};
    std::size_t expect = 0;
    for (int mask = 0; mask < 8; ++mask) {
      std::size_t t = 1;
      for (int d = 0; d < 3; ++d)
        if (mask & (1 << d))
          t *= std::size_t(std::count_if(menu.tiles.begin(), menu.tiles.end(), [&](int x) { return x <= n[std::size_t(d)]; }));
      expect += t;
    }
    CHECK(enumerate_schedules(g.states[0].nodes[0], g).size() == 24 * expect);
  }
  SUBCASE("forward solver never maps K") {
    const auto g = test::graph_of(test::kCumsum, {8, 8, 4});
    const auto all = enumerate_schedules(g.states[0].nodes[0], g);
    CHECK_FALSE(all.empty());
    for (const auto& s : all) CHECK_FALSE(s.is_map(Dim::K));
  }
  SUBCASE("transport nodes match a product-and-filter oracle") {
    const auto g = compile_corpus("transport", {16, 16, 8});
    const ScheduleMenu menu;
    for (const auto& node : g.states[0].nodes) {
      const auto cands = cache_candidates(node, g);
      std::size_t count = 0;
      std::vector<RegionStrategy> regions{RegionStrategy::Predicated, RegionStrategy::Split};
      for (RegionStrategy rs : regions)
        for (const auto& o : all_orders())
          for (int mask = 0; mask < 8; ++mask)
            for (int ti : menu.tiles)
              for (int tj : menu.tiles)
                for (int tk : menu.tiles) {
                  std::size_t combos = 1;
                  for (std::size_t c = 0; c < cands.size(); ++c) combos *= 3;
                  for (std::size_t ci = 0; ci < combos; ++ci) {
                    Schedule s;
                    s.order = o;
                    s.map = {bool(mask & 1), bool(mask & 2), bool(mask & 4)};
                    s.tile = {ti, tj, tk};
                    s.region = rs;
                    std::size_t x = ci;
                    for (const auto& f : cands) {
                      const auto k = CacheKind(x % 3);
                      x /= 3;
                      if (k != CacheKind::None) s.caches[f] = k;
                    }
                    count += schedule_validity(node, g, s).ok ? 1 : 0;
                  }
                }
      CAPTURE(node.name);
      CHECK(enumerate_schedules(node, g).size() == count);
    }
  }
}

TEST_CASE("transport chain default order respects its dependences") {
  const auto g = compile_corpus("transport", {16, 16, 8});
  for (const auto& n : g.states[0].nodes) {
    CAPTURE(n.name);
    CHECK(schedule_validity(n, g, n.schedule).ok);
    CHECK(n.schedule == default_schedule(n, g));
  }
}
