#include <cmath>
#include <functional>

#include "doctest.h"
#include "helpers.hpp"
#include "sf/exec/reference.hpp"
#include "sf/exec/scheduled.hpp"
#include "sf/sched/validity.hpp"
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

bool has_kind(const DataflowGraph& g, XKind k) {
  for (const auto& t : list_applicable(g))
    if (t.kind == k) return true;
  return false;
}

Transformation first_of(const DataflowGraph& g, XKind k) {
  for (const auto& t : list_applicable(g))
    if (t.kind == k) return t;
  throw std::runtime_error(std::string("not applicable: ") + xkind_name(k));
}

Expr parse_expr(const std::string& text) {
  const auto p = parse_program("field x: float64[I, J, K]\nfield y: float64[I, J, K]\nfield z: float64[I, J, K]\n"
                               "param dt = 0.5\nparam e = 2.0\n"
                               "stencil s:\n    with computation(PARALLEL), interval(...):\n        z = " +
                               text + "\ndriver:\n    s()\n");
  return p.stencils[0].blocks[0].statements[0].value;
}

int count(const Expr& e, const std::function<bool(const Expr&)>& pred) {
  int n = 0;
  visit(e, [&](const Expr& x) { n += pred(x) ? 1 : 0; });
  return n;
}

bool is_pow(const Expr& x) { return x.kind == ExprKind::Binary && x.bop == BinaryOp::Pow; }

}  // namespace

TEST_CASE("thread-level fusion needs a pointwise dependence") {
  const auto a = test::graph_of(kPointwise, {8, 8, 4});
  CHECK(can_apply(a, Transformation{XKind::ThreadLevelFusion, 0, 0}));
  const auto b = test::graph_of(test::kChain, {8, 8, 4});
  CHECK_FALSE(can_apply(b, Transformation{XKind::ThreadLevelFusion, 0, 0}));
  CHECK(can_apply(b, Transformation{XKind::RedundantComputeFusion, 0, 0}));
}

TEST_CASE("fusion keeps node names joined") {
  auto g = test::graph_of(kPointwise, {8, 8, 4});
  apply(g, first_of(g, XKind::ThreadLevelFusion));
  REQUIRE(g.states[0].nodes.size() == 1);
  CHECK(g.states[0].nodes[0].name == "s1_0+s2_0");
  CHECK(validate_graph(g).empty());
  // fully fused: no fusion left
  CHECK_FALSE(has_kind(g, XKind::ThreadLevelFusion));
  CHECK_FALSE(has_kind(g, XKind::RedundantComputeFusion));
  CHECK_FALSE(has_kind(g, XKind::IntervalFusion));
}

TEST_CASE("PowerRewrite applicability") {
  CHECK(count_rewritable_powers(parse_expr("x ** 3")) == 1);
  CHECK(count_rewritable_powers(parse_expr("x ** e")) == 0);
  CHECK(count_rewritable_powers(parse_expr("x ** 0.5 + y ** -2")) == 2);
  CHECK(count_rewritable_powers(parse_expr("x ** 9")) == 0);
  CHECK_FALSE(has_kind(test::graph_of(kPointwise, {8, 8, 4}), XKind::PowerRewrite));
}

TEST_CASE("PowerRewrite of the vorticity listing") {
  Expr e = parse_expr("dt * (x ** 2.0 + y ** 2.0) ** 0.5");
  CHECK(rewrite_powers(e) == 3);
  CHECK(count(e, is_pow) == 0);
  CHECK(count(e, [](const Expr& x) { return x.kind == ExprKind::Call && x.fn == Builtin::Sqrt; }) == 1);
  // the two squares, plus the outer product with dt
  CHECK(count(e, [](const Expr& x) {
          return x.kind == ExprKind::Binary && x.bop == BinaryOp::Mul && x.args[0].kind == ExprKind::FieldRef &&
                 x.args[0].same(x.args[1]);
        }) == 2);
}

TEST_CASE("PowerRewrite on smagorinsky stays within 1e-12") {
  auto g = compile_corpus("smagorinsky", {16, 16, 8});
  const auto before = g;
  apply(g, first_of(g, XKind::PowerRewrite));
  for (const auto& b : g.states[0].nodes[0].blocks)
    for (const auto& st : b.statements) CHECK(count(st.value, is_pow) == 0);
  const RefProgram p0 = reference_program(before), p1 = reference_program(g);
  DenseSet d0 = reference_inputs(p0, 3), d1 = reference_inputs(p1, 3);
  run_reference(p0, d0);
  run_reference(p1, d1);
  const auto& a = d0.at("smag").data;
  const auto& b = d1.at("smag").data;
  double worst = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != 0) worst = std::max(worst, std::fabs(a[i] - b[i]) / std::fabs(a[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("constant propagation folds driver values into bindings") {
  auto g = test::graph_of(R"(field x: float64[I, J, K]
param a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]
param b = 0.0

stencil s:
    with computation(PARALLEL), interval(...):
        x = b

driver:
    i = 5
    j = i + 1
    s(b=a[j])
)",
                          {4, 4, 2});
  REQUIRE(constant_propagation_changes(g));
  apply(g, first_of(g, XKind::ConstantPropagation));
  const StencilNode* n = nullptr;
  for (const auto& st : g.states)
    for (const auto& node : st.nodes) n = &node;
  REQUIRE(n);
  REQUIRE(n->bindings.size() == 1);
  CHECK(n->bindings[0].first == "b");
  CHECK(to_string(n->bindings[0].second) == "a[6]");
  CHECK_FALSE(constant_propagation_changes(g));
}

TEST_CASE("driver passes resolve branches and unroll loops") {
  auto g = compile_corpus("dycore", {8, 8, 4});
  const auto trace_before = unrolled_trace(g).size();
  CHECK(run_driver_passes(g) > 0);
  CHECK(g.loops.empty());
  CHECK_FALSE(dead_branches_present(g));
  CHECK(unrolled_trace(g).size() == trace_before);
  std::size_t nodes = 0;
  for (const auto& s : g.states) nodes += s.nodes.size();
  CHECK(nodes == trace_before);
  CHECK(validate_graph(g).empty());
}

TEST_CASE("RegionPrune") {
  SUBCASE("corner statements on a rank that owns no corner are removed") {
    auto g = compile_corpus("corners", {8, 8, 4, false, false, false, false});
    const auto t = first_of(g, XKind::RegionPrune);
    apply(g, t);
    std::size_t stmts = 0;
    for (const auto& n : g.states[0].nodes)
      for (const auto& b : n.blocks) stmts += b.statements.size();
    CHECK(stmts == 0);
  }
  SUBCASE("owned corners shrink to the region cells") {
    auto g = compile_corpus("corners", {8, 8, 4});
    const auto before = query_movement(g, g.states[0].nodes[0]);
    apply(g, first_of(g, XKind::RegionPrune));
    // movement is the same: it always was only the corner cells
    CHECK(query_movement(g, g.states[0].nodes[0]) == before);
    CHECK(before.at("q").write_bytes == 4 * 4 * 8);
  }
}

TEST_CASE("transport chain offers fusion of its stages") {
  const auto g = compile_corpus("transport", {16, 16, 8});
  bool tlf = false;
  for (const auto& t : list_applicable(g))
    if (t.kind == XKind::ThreadLevelFusion && t.node == 2) tlf = true;  // update + scale
  CHECK(tlf);
}

TEST_CASE("transformations are bound to a graph version") {
  auto g = compile_corpus("transport", {8, 8, 4});
  const auto ts = list_applicable(g);
  REQUIRE(ts.size() >= 2);
  apply(g, ts[0]);
  try {
    apply(g, ts[1]);
    FAIL("stale transformation applied");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("version") != std::string::npos);
  }
}

TEST_CASE("JSON form of a transformation round trips") {
  const auto g = compile_corpus("transport", {8, 8, 4});
  for (const auto& t : list_applicable(g)) {
    const auto back = transformation_from_json(transformation_to_json(t));
    CHECK(back == t);
    CHECK(back.version == t.version);
  }
}

TEST_CASE("every single transformation keeps the graph valid") {
  for (const auto& e : corpus_entries()) {
    const auto g = compile_corpus(e.name, {8, 8, 4});
    for (const auto& t : list_applicable(g)) {
      auto h = g;
      apply(h, t);
      CAPTURE(t.describe());
      CHECK(validate_graph(h).empty());
      CHECK(h.version > g.version);
    }
  }
}

TEST_CASE("unrolling a loop whose body caches a temporary") {
  auto g = test::graph_of(R"(field q: float64[I, J, K]
field cx: float64[I, J, K]
temp fx: float64[I, J, K]
config n_split = 2

stencil flux_x:
    with computation(PARALLEL), interval(...):
        fx = 0.5 * cx * (q[-1, 0, 0] + q)
        with horizontal(region[i_start, :]):
            fx = 0.0

driver:
    for t in range(n_split) unroll:
        flux_x()
)",
                          {16, 16, 4});
  const auto before = unrolled_trace(g).size();
  CHECK(run_driver_passes(g) > 0);
  CHECK(g.loops.empty());
  CHECK(unrolled_trace(g).size() == before);
  CHECK(validate_graph(g).empty());
  for (const auto& st : g.states)
    for (const auto& n : st.nodes) CHECK(schedule_validity(n, g, n.schedule).ok);
  const RefProgram p = reference_program(g);
  DenseSet want = reference_inputs(p, 1);
  run_reference(p, want);
  FieldSet f = allocate_fields(g);
  fill_inputs(f, g, 1);
  Executor(g).run(f);
  CHECK(compare(want, f, g).bitwise);
}
