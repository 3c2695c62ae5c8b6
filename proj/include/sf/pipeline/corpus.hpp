#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sf/exec/field.hpp"
#include "sf/frontend/ast.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

struct CorpusEntry {
  std::string name;
  std::string file;  // .stn path
  double input_lo = 0.1;
  double input_hi = 10.0;
  bool dense_solver = false;  // also checked against a dense LU solve
  bool composite = false;     // the combined driver, not one motif
};

/// Directory holding the corpus sources (SF_CORPUS_DIR unless overridden
/// by the SF_CORPUS environment variable).
std::string corpus_dir();

/// copy, smagorinsky, tridiagonal, transport, corners, then dycore.
const std::vector<CorpusEntry>& corpus_entries();
const CorpusEntry& corpus_entry(const std::string& name);

/// Parse, validate, lower, assign default schedules, verify.
DataflowGraph compile_program(const StencilProgram& program, const Domain& domain);
/// Runs constant propagation, dead-branch elimination and unrolling of the
/// marked loops until none applies. Returns the number of rewrites.
int run_driver_passes(DataflowGraph& graph);

StencilProgram load_corpus_program(const CorpusEntry& entry);
DataflowGraph compile_corpus(const std::string& name, const Domain& domain);

/// Largest relative difference between `x` and a dense LU solve of the
/// tridiagonal systems defined by a, b, c, d (diagonal a + b + c + 1).
double tridiagonal_dense_error(const FieldSet& fields, const Domain& domain);

inline constexpr double kDenseSolverTolerance = 1e-10;

struct SelfTestResult {
  std::string name;
  bool ok = false;
  bool bitwise = false;
  double max_rel = 0.0;
  double dense_error = 0.0;
  std::string detail;
};

/// Executes the entry with its default schedules and compares against the
/// reference interpreter (and the dense solver where applicable).
SelfTestResult self_test(const CorpusEntry& entry, const Domain& domain, std::uint64_t seed);

}  // namespace sf
