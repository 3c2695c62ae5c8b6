#include "doctest.h"
#include "helpers.hpp"
#include "sf/exec/timing.hpp"
#include "sf/perf/model.hpp"
#include "sf/xform/transforms.hpp"

using namespace sf;

namespace {

const char* kPointwise = R"(field inp: float64[I, J, K]
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

KernelBound entry(const std::string& name, double grouped, double util) {
  KernelBound k;
  k.kernel = name;
  k.invocations = 1;
  k.grouped_s = grouped;
  k.measured_s = grouped;
  k.utilization = util;
  k.bound_s = grouped * util;
  return k;
}

}  // namespace

TEST_CASE("copy 8x8x4 at 10 GB/s") {
  const auto g = test::graph_of(test::kCopy, {8, 8, 4});
  const auto& n = g.states[0].nodes[0];
  CHECK(unique_bytes(g, n) == 4096);
  CHECK(model_kernel(g, n, 10e9) == doctest::Approx(409.6e-9).epsilon(1e-12));
  CHECK(model_graph(g, 10e9) == model_kernel(g, n, 10e9));
}

TEST_CASE("3-point stencil: 320 unique input elements") {
  const auto g = test::graph_of(test::kThreePoint, {8, 8, 4});
  CHECK(unique_bytes(g, g.states[0].nodes[0]) == (320 + 256) * 8);
}

TEST_CASE("fused transient is not counted") {
  auto g = test::graph_of(kPointwise, {8, 8, 4});
  std::int64_t before = 0;
  for (const auto& n : g.states[0].nodes) before += unique_bytes(g, n);
  CHECK(before == 4 * 256 * 8);
  for (const auto& t : list_applicable(g))
    if (t.kind == XKind::ThreadLevelFusion) {
      apply(g, t);
      break;
    }
  REQUIRE(g.states[0].nodes.size() == 1);
  CHECK(unique_bytes(g, g.states[0].nodes[0]) == 4 * 256 * 8);
  bool elided = false;
  for (const auto& t : list_applicable(g))
    if (t.kind == XKind::LocalTemporaryElision && t.field == "tmp") {
      apply(g, t);
      elided = true;
      break;
    }
  REQUIRE(elided);
  const auto& n = g.states[0].nodes[0];
  REQUIRE(n.schedule.cache_of("tmp") == CacheKind::Local);
  CHECK(unique_bytes(g, n) == 2 * 256 * 8);
}

TEST_CASE("unique bytes agree with the access oracle") {
  for (const char* name : {"smagorinsky", "transport", "corners"}) {
    CAPTURE(name);
    const auto g = compile_corpus(name, {12, 10, 6});
    const auto oracle = test::unique_accesses(g);
    const auto trace = unrolled_trace(g);
    for (std::size_t c = 0; c < trace.size(); ++c) {
      const auto& n = g.states[std::size_t(trace[c].state)].nodes[std::size_t(trace[c].node)];
      std::int64_t want = 0;
      for (const auto& [f, rw] : oracle.at(c))
        if (n.schedule.cache_of(f) == CacheKind::None) want += std::int64_t(rw.first + rw.second) * 8;
      CHECK(unique_bytes(g, n) == want);
    }
  }
}

TEST_CASE("report on a measured run") {
  const auto g = compile_corpus("transport", {16, 16, 8});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  const BenchResult b = benchmark(g, f, 3);
  const PerfReport rep = build_report(g, b, 10e9);
  // every kernel exactly once
  CHECK(rep.entries.size() == b.kernels.size());
  std::set<std::string> names;
  for (const auto& e : rep.entries) names.insert(e.kernel);
  CHECK(names.size() == rep.entries.size());
  for (std::size_t i = 1; i < rep.entries.size(); ++i) CHECK(rep.entries[i - 1].grouped_s >= rep.entries[i].grouped_s);
  for (const auto& e : rep.entries) {
    REQUIRE(e.measured_s.has_value());
    CHECK(e.utilization == doctest::Approx(e.bound_s / *e.measured_s));
  }
  const std::string csv = report_csv(rep);
  CHECK(csv.substr(0, csv.find('\n')) == "kernel,invocations,measured_s,bound_s,utilization,flags");
  CHECK(report_json(rep).at("kernels").size() == rep.entries.size());
  CHECK(hotspot_list(rep, 100).size() == rep.entries.size());
}

TEST_CASE("hotspot ranking") {
  PerfReport rep;
  rep.entries = {entry("full", 1.0, 1.0), entry("half", 1.0, 0.5)};
  const auto h = hotspot_list(rep, 5);
  REQUIRE(h.size() == 2);
  CHECK(h[0] == "half");
  CHECK(h[1] == "full");
  CHECK(hotspot_list(rep, 1) == std::vector<std::string>{"half"});

  PerfReport one;
  one.entries = {entry("only", 2.0, 0.3)};
  CHECK(hotspot_list(one, 3) == std::vector<std::string>{"only"});
}
