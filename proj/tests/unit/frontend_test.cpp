#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "sf/frontend/ast_json.hpp"
#include "sf/frontend/extents.hpp"
#include "sf/frontend/validate.hpp"

using namespace sf;

namespace {

std::set<std::string> categories(const std::string& src) {
  std::set<std::string> out;
  for (const auto& d : validate(parse_program(src))) out.insert(d.category);
  return out;
}

const char* kHeader = R"(field a: float64[I, J, K]
field b: float64[I, J, K]
field h: float64[I, J]
param w = 0.5
config flag = 1
)";

}  // namespace

TEST_CASE("region override parses as a second statement") {
  const auto p = parse_program(R"(field v: float64[I, J, K]
field vc: float64[I, J, K]
field flux: float64[I, J, K]
param dt2 = 0.5
param cosa = 0.5
param sina = 0.8

stencil flux_calc:
    with computation(PARALLEL), interval(...):
        flux = dt2 * (v - vc * cosa) / sina
        with horizontal(region[:, j_start]):
            flux = dt2 * v

driver:
    flux_calc()
)");
  REQUIRE(p.stencils.size() == 1);
  REQUIRE(p.stencils[0].blocks.size() == 1);
  const auto& st = p.stencils[0].blocks[0].statements;
  REQUIRE(st.size() == 2);
  CHECK_FALSE(st[0].region.has_value());
  REQUIRE(st[1].region.has_value());
  CHECK(st[1].region->i.full);
  CHECK(st[1].region->j.point);
  CHECK(st[1].region->j.lo->anchor == AxisBound::Anchor::Start);
  CHECK(st[1].region->j.lo->offset == 0);
  CHECK(validate(p).empty());
}

TEST_CASE("empty stencil body is a syntax error") {
  try {
    parse_program("field a: float64[I, J, K]\n\nstencil s:\n\ndriver:\n    s()\n");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.category() == "syntax error");
    CHECK(std::string(e.what()) == "empty computation");
  }
}

TEST_CASE("two reads at i offsets") {
  const auto p = parse_program(test::kThreePoint);
  const auto reads = field_reads(p.stencils[0].blocks[0].statements[0].value);
  REQUIRE(reads.size() == 3);
  CHECK(reads[0].second == Offset{-1, 0, 0});
  CHECK(reads[2].second == Offset{1, 0, 0});
}

TEST_CASE("syntax errors carry line and column") {
  try {
    parse_program("field a: float64[I, J, K]\nbogus x\n");
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.loc().line == 2);
    CHECK(e.loc().col == 1);
  }
}

TEST_CASE("validation rules") {
  const std::string head = kHeader;
  SUBCASE("PARALLEL vertical dependency is rejected") {
    CHECK(categories(head + "stencil s:\n    with computation(PARALLEL), interval(...):\n        a = a[0, 0, -1] + b\n"
                            "driver:\n    s()\n")
              .count("vertical dependency in PARALLEL block"));
  }
  SUBCASE("FORWARD vertical dependency is a solver") {
    CHECK(categories(head + "stencil s:\n    with computation(FORWARD), interval(1, None):\n        a = a[0, 0, -1] + b\n"
                            "driver:\n    s()\n")
              .empty());
  }
  SUBCASE("branch on an undeclared config") {
    CHECK(categories(head + "stencil s:\n    with computation(PARALLEL), interval(...):\n        a = b\n"
                            "driver:\n    if nope:\n        s()\n")
              .count("unresolvable control flow"));
  }
}

TEST_CASE("ten malformed mutants, one per rule") {
  const std::string head = kHeader;
  auto stencil = [&](const std::string& body, const std::string& extra = "") {
    return head + extra + "stencil s:\n" + body + "driver:\n    s()\n";
  };
  const std::string par = "    with computation(PARALLEL), interval(...):\n";
  const std::vector<std::pair<std::string, std::string>> mutants{
      {"undeclared field", stencil(par + "        zz = b\n")},
      {"dimension mismatch", stencil(par + "        a = h[0, 0, 1]\n")},
      {"vertical dependency in PARALLEL block", stencil(par + "        a = b\n        b = a[0, 0, 1]\n")},
      {"unresolvable control flow", head + "stencil s:\n" + par + "        a = b\ndriver:\n    for n in range(w):\n        s()\n"},
      {"duplicate name", stencil(par + "        a = b\n", "param b = 1.0\n")},
      {"overlapping intervals",
       stencil("    with computation(FORWARD):\n        with interval(0, 2):\n            a = b\n"
               "        with interval(1, None):\n            a = b\n")},
      {"self-referencing offset", stencil(par + "        a = a[1, 0, 0]\n")},
      {"unknown stencil", head + "stencil s:\n" + par + "        a = b\ndriver:\n    t()\n"},
      {"unknown name", stencil(par + "        a = b * nope\n")},
      {"invalid interval", stencil("    with computation(PARALLEL), interval(2, 1):\n        a = b\n")},
  };
  for (const auto& [rule, src] : mutants) {
    CAPTURE(rule);
    const auto cats = categories(src);
    CHECK(cats.count(rule) == 1);
  }
  // every corpus program validates
  for (const auto& e : corpus_entries()) {
    CAPTURE(e.name);
    CHECK(validate(load_corpus_program(e)).empty());
  }
}

TEST_CASE("print then parse is a fixed point") {
  for (const auto& e : corpus_entries()) {
    CAPTURE(e.name);
    const auto p = load_corpus_program(e);
    const auto q = parse_program(print_program(p));
    CHECK(same_program(p, q));
    CHECK(print_program(q) == print_program(p));
  }
}

TEST_CASE("AST JSON of expressions round trips") {
  const auto p = load_corpus_program(corpus_entry("smagorinsky"));
  const Expr& e = p.stencils[0].blocks[0].statements[0].value;
  CHECK(expr_from_json(expr_to_json(e)).same(e));
}

TEST_CASE("infer_extents") {
  const Domain d{8, 8, 4};
  SUBCASE("di in {-1, +1}") {
    const auto x = infer_extents(parse_program(test::kThreePoint), d);
    CHECK(x.at("inp") == Extent{{-1, 0, 0}, {1, 0, 0}});
    CHECK(x.at("out").zero());
  }
  SUBCASE("copy has no halo") {
    for (const auto& [f, e] : infer_extents(parse_program(test::kCopy), d)) CHECK(e.zero());
  }
  SUBCASE("two-stencil chain") {
    const auto x = infer_extents(parse_program(test::kChain), d);
    CHECK(x.at("inp") == Extent{{-1, -2, 0}, {1, 0, 0}});
    CHECK(x.at("tmp") == Extent{{0, -2, 0}, {0, 0, 0}});
  }
}

// Marks every cell touched while computing one interior output and compares
// its hull with the inferred extents.
TEST_CASE("extents match a touched-cell oracle on random chains") {
  std::uint64_t state = 12345;
  auto next = [&](int lo, int hi) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return lo + int((state >> 33) % std::uint64_t(hi - lo + 1));
  };
  const Domain d{8, 8, 4};
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Offset> o1, o2;
    for (int r = next(1, 3); r > 0; --r) o1.push_back({next(-3, 3), next(-3, 3), 0});
    for (int r = next(1, 3); r > 0; --r) o2.push_back({next(-3, 3), next(-3, 3), 0});
    auto refs = [](const std::string& f, const std::vector<Offset>& os) {
      std::string s;
      for (std::size_t i = 0; i < os.size(); ++i)
        s += (i ? " + " : "") + f + "[" + std::to_string(os[i].di) + ", " + std::to_string(os[i].dj) + ", 0]";
      return s;
    };
    const std::string src = "field inp: float64[I, J, K]\nfield out: float64[I, J, K]\ntemp tmp: float64[I, J, K]\n"
                            "stencil s1:\n    with computation(PARALLEL), interval(...):\n        tmp = " +
                            refs("inp", o1) +
                            "\nstencil s2:\n    with computation(PARALLEL), interval(...):\n        out = " +
                            refs("tmp", o2) + "\ndriver:\n    s1()\n    s2()\n";
    // oracle: out(x) needs tmp(x + b), which needs inp(x + b + a)
    Extent inp, tmp;
    for (const auto& b : o2) {
      tmp.merge({{b.di, b.dj, 0}, {b.di, b.dj, 0}});
      for (const auto& a : o1) inp.merge({{a.di + b.di, a.dj + b.dj, 0}, {a.di + b.di, a.dj + b.dj, 0}});
    }
    const auto x = infer_extents(parse_program(src), d);
    CAPTURE(src);
    CHECK(x.at("inp") == inp);
    CHECK(x.at("tmp") == tmp);
  }
}
