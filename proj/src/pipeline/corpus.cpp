#include "sf/pipeline/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "sf/exec/reference.hpp"
#include "sf/exec/scheduled.hpp"
#include "sf/frontend/parser.hpp"
#include "sf/frontend/validate.hpp"
#include "sf/xform/transforms.hpp"

namespace sf {

std::string corpus_dir() {
  if (const char* env = std::getenv("SF_CORPUS"); env && *env) return env;
  return SF_CORPUS_DIR;
}

const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries = [] {
    const std::string d = corpus_dir() + "/";
    std::vector<CorpusEntry> e;
    e.push_back({"copy", d + "copy.stn"});
    e.push_back({"smagorinsky", d + "smagorinsky.stn"});
    e.push_back({"tridiagonal", d + "tridiagonal.stn", 0.1, 10.0, true});
    e.push_back({"transport", d + "transport.stn"});
    e.push_back({"corners", d + "corners.stn"});
    e.push_back({"dycore", d + "dycore.stn", 0.1, 10.0, true, true});
    return e;
  }();
  return entries;
}

const CorpusEntry& corpus_entry(const std::string& name) {
  for (const auto& e : corpus_entries())
    if (e.name == name) return e;
  throw Error("unknown corpus entry", "no corpus program named '" + name + "'");
}

DataflowGraph compile_program(const StencilProgram& program, const Domain& domain) {
  require_valid(program);
  DataflowGraph g = lower(program, domain);
  assign_default_schedules(g);
  const auto diags = validate_graph(g);
  if (!diags.empty()) throw InternalError("lowered graph is invalid: " + diags.front().message);
  return g;
}

int run_driver_passes(DataflowGraph& g) {
  int applied = 0;
  for (;;) {
    if (applied > 10000) throw InternalError("driver passes do not converge");
    bool found = false;
    for (const auto& t : list_applicable(g)) {
      if (t.kind != XKind::ConstantPropagation && t.kind != XKind::DeadBranchElimination &&
          t.kind != XKind::LoopUnroll)
        continue;
      apply(g, t);
      ++applied;
      found = true;
      break;
    }
    if (!found) return applied;
  }
}

StencilProgram load_corpus_program(const CorpusEntry& entry) { return parse_file(entry.file); }

DataflowGraph compile_corpus(const std::string& name, const Domain& domain) {
  return compile_program(load_corpus_program(corpus_entry(name)), domain);
}

double tridiagonal_dense_error(const FieldSet& fields, const Domain& domain) {
  const auto& a = fields.at("a");
  const auto& b = fields.at("b");
  const auto& c = fields.at("c");
  const auto& d = fields.at("d");
  const auto& x = fields.at("x");
  const int n = domain.nk;
  std::vector<double> m(static_cast<std::size_t>(n) * static_cast<std::size_t>(n));
  std::vector<double> rhs(static_cast<std::size_t>(n));
  double worst = 0.0;
  for (int j = 0; j < domain.nj; ++j)
    for (int i = 0; i < domain.ni; ++i) {
      std::fill(m.begin(), m.end(), 0.0);
      auto at = [&](int r, int col) -> double& { return m[std::size_t(r) * std::size_t(n) + std::size_t(col)]; };
      for (int k = 0; k < n; ++k) {
        at(k, k) = a.get(i, j, k) + b.get(i, j, k) + c.get(i, j, k) + 1.0;
        if (k > 0) at(k, k - 1) = a.get(i, j, k);
        if (k + 1 < n) at(k, k + 1) = c.get(i, j, k);
        rhs[std::size_t(k)] = d.get(i, j, k);
      }
      // Gaussian elimination with partial pivoting.
      for (int p = 0; p < n; ++p) {
        int best = p;
        for (int r = p + 1; r < n; ++r)
          if (std::fabs(at(r, p)) > std::fabs(at(best, p))) best = r;
        if (best != p) {
          for (int col = 0; col < n; ++col) std::swap(at(p, col), at(best, col));
          std::swap(rhs[std::size_t(p)], rhs[std::size_t(best)]);
        }
        for (int r = p + 1; r < n; ++r) {
          const double f = at(r, p) / at(p, p);
          if (f == 0.0) continue;
          for (int col = p; col < n; ++col) at(r, col) -= f * at(p, col);
          rhs[std::size_t(r)] -= f * rhs[std::size_t(p)];
        }
      }
      for (int r = n - 1; r >= 0; --r) {
        double s = rhs[std::size_t(r)];
        for (int col = r + 1; col < n; ++col) s -= at(r, col) * rhs[std::size_t(col)];
        rhs[std::size_t(r)] = s / at(r, r);
      }
      for (int k = 0; k < n; ++k) {
        const double want = rhs[std::size_t(k)];
        const double got = x.get(i, j, k);
        const double rel = std::fabs(got - want) / std::max(std::fabs(want), 1e-300);
        if (!(rel <= worst)) worst = rel;  // NaN propagates as worst
      }
    }
  return worst;
}

SelfTestResult self_test(const CorpusEntry& entry, const Domain& domain, std::uint64_t seed) {
  SelfTestResult r;
  r.name = entry.name;
  const DataflowGraph g = compile_corpus(entry.name, domain);
  const RefProgram prog = reference_program(g);
  DenseSet expected = reference_inputs(prog, seed);
  const RefStats stats = run_reference(prog, expected);

  FieldSet fields = allocate_fields(g);
  fill_inputs(fields, g, seed);
  Executor ex(g, 1);
  ex.run(fields);
  const Comparison cmp = compare(expected, fields, g);
  r.bitwise = cmp.bitwise;
  r.max_rel = cmp.max_rel;
  r.ok = cmp.bitwise;
  if (!cmp.bitwise) r.detail = "differs from the reference in '" + cmp.worst + "'";
  if (stats.nonfinite > 0) {
    r.ok = false;
    r.detail = "reference produced non-finite values";
  }
  if (entry.dense_solver) {
    r.dense_error = tridiagonal_dense_error(fields, domain);
    if (!(r.dense_error <= kDenseSolverTolerance)) {
      r.ok = false;
      r.detail = "tridiagonal solution differs from the dense solve";
    }
  }
  return r;
}

}  // namespace sf
