#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "sf/exec/bandwidth.hpp"
#include "sf/exec/timing.hpp"
#include "sf/sched/validity.hpp"

using namespace sf;

TEST_CASE("copy: out equals inp") {
  const auto g = test::graph_of(test::kCopy, {8, 8, 4});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 7);
  f.at("out").fill(-1.0);
  Executor(g).run(f);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 8; ++j)
      for (int i = 0; i < 8; ++i) CHECK(f.at("out").get(i, j, k) == f.at("inp").get(i, j, k));
}

TEST_CASE("three-point stencil leaves the output halo alone") {
  const auto g = test::graph_of(test::kThreePoint, {8, 8, 4});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  Executor(g).run(f);
  const auto& in = f.at("inp");
  for (int i = 0; i < 8; ++i) {
    const double want = in.get(i - 1, 2, 1) + in.get(i, 2, 1) + in.get(i + 1, 2, 1);
    CHECK(f.at("out").get(i, 2, 1) == want);
  }
  // inp keeps its halo values
  CHECK(in.get(-1, 0, 0) == input_value(1, "inp", -1, 0, 0));
}

TEST_CASE("forward cumulative sum") {
  const auto g = test::graph_of(test::kCumsum, {3, 2, 4});
  FieldSet f = allocate_fields(g);
  f.at("inp").fill(1.0);
  f.at("a").fill(0.0);
  Executor(g).run(f);
  for (int k = 0; k < 4; ++k)
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 3; ++i) CHECK(f.at("a").get(i, j, k) == double(k + 1));
}

TEST_CASE("tridiagonal solver agrees with a dense solve") {
  const Domain d{8, 8, 8};
  const auto g = compile_corpus("tridiagonal", d);
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  Executor(g).run(f);
  CHECK(tridiagonal_dense_error(f, d) <= 1e-12);
}

TEST_CASE("copy: every schedule, 1 and 4 workers give identical outputs") {
  const auto g0 = test::graph_of(test::kCopy, {8, 8, 4});
  FieldSet ref = allocate_fields(g0);
  fill_inputs(ref, g0, 1);
  Executor(g0).run(ref);
  for (const auto& s : enumerate_schedules(g0.states[0].nodes[0], g0)) {
    auto g = g0;
    g.states[0].nodes[0].schedule = s;
    for (int w : {1, 4}) {
      FieldSet f = allocate_fields(g);
      fill_inputs(f, g, 1);
      Executor(g, w).run(f);
      CAPTURE(s.describe());
      CHECK(compare(ref, f, g).bitwise);
    }
  }
}

TEST_CASE("corpus programs match the reference interpreter") {
  for (const auto& e : corpus_entries()) {
    CAPTURE(e.name);
    const auto r = self_test(e, {12, 10, 6}, 5);
    CHECK(r.ok);
    CHECK(r.bitwise);
  }
}

TEST_CASE("benchmark statistics") {
  const auto g = test::graph_of(R"(field inp: float64[I, J, K]
field out: float64[I, J, K]

stencil copy:
    with computation(PARALLEL), interval(...):
        out = inp

driver:
    for t in range(3):
        copy()
)",
                                {32, 32, 8});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  const BenchResult r = benchmark(g, f, 10);
  REQUIRE(r.kernels.size() == 1);
  const auto& k = r.kernels[0];
  CHECK(k.invocations == 3);
  CHECK(k.all.reps() == 30);
  for (const auto& inst : k.instances) {
    CHECK(inst.reps() == 10);
    CHECK(inst.median() >= inst.min());
    CHECK(inst.median() <= inst.max());
  }
  CHECK(r.total.reps() == 10);
  // host execution has no overlap: total is close to the kernel sum
  CHECK(r.total.median() == doctest::Approx(k.grouped()).epsilon(0.2));
}

TEST_CASE("timing CSV formats") {
  const auto g = compile_corpus("transport", {8, 8, 4});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  const BenchResult r = benchmark(g, f, 3);
  const std::string csv = timings_csv(r);
  CHECK(csv.substr(0, csv.find('\n')) == "kernel,invocations,median_s,min_s");
  const std::string raw = timings_raw(r);
  CHECK(raw.substr(0, raw.find('\n')) == "kernel,instance,rep,seconds");
  const BenchResult back = parse_timings_raw(raw);
  REQUIRE(back.kernels.size() == r.kernels.size());
  for (std::size_t i = 0; i < r.kernels.size(); ++i) {
    CHECK(back.kernels[i].name == r.kernels[i].name);
    CHECK(back.kernels[i].measured() == doctest::Approx(r.kernels[i].measured()).epsilon(1e-8));
  }
  CHECK(timings_raw(back) == raw);
}

TEST_CASE("malformed raw timings are rejected") {
  CHECK_THROWS_AS(parse_timings_raw("kernel,rep,seconds\n"), Error);
  CHECK_THROWS_AS(parse_timings_raw("kernel,instance,rep,seconds\na,0,0,abc\n"), Error);
}

TEST_CASE("bandwidth probe is stable") {
  const std::int64_t bytes = std::int64_t(256) << 20;
  const double a = measure_bandwidth(bytes, 10).bytes_per_second;
  const double b = measure_bandwidth(bytes, 10).bytes_per_second;
  CHECK(a > 0);
  CHECK(std::fabs(a - b) / std::max(a, b) <= 0.10);
  CHECK(llc_bytes() > 0);
}

TEST_CASE("fields: clone and restore") {
  const auto g = compile_corpus("transport", {8, 8, 4});
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 2);
  FieldSet c = clone_fields(f);
  f.at("q").fill(0.0);
  restore_fields(c, f);
  CHECK(compare(c, f, g).bitwise);
  // rows start aligned
  const auto& L = f.at("q").layout();
  CHECK(L.index(0, 3, 2) % L.alignment == 0);
}
