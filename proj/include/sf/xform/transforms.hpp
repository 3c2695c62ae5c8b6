#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

enum class XKind {
  IntervalFusion,
  ThreadLevelFusion,
  RedundantComputeFusion,
  LocalTemporaryElision,
  DeadLoadElimination,
  CarriedValueCaching,
  PowerRewrite,
  RegionSplit,
  RegionPrune,
  ConstantPropagation,
  DeadBranchElimination,
  LoopUnroll,
};

const char* xkind_name(XKind k);
XKind xkind_from_name(const std::string& name);
const std::vector<XKind>& all_xkinds();

/// A graph rewrite bound to a location. Fusions act on `node` and `node + 1`
/// of `state`; driver passes use state = -1; LoopUnroll names a loop.
struct Transformation {
  XKind kind = XKind::PowerRewrite;
  int state = -1;
  int node = -1;
  std::string field;  // LocalTemporaryElision, DeadLoadElimination, CarriedValueCaching
  int loop = -1;      // LoopUnroll
  std::uint64_t version = 0;

  std::string describe() const;
  friend bool operator==(const Transformation& a, const Transformation& b) {
    return a.kind == b.kind && a.state == b.state && a.node == b.node && a.field == b.field &&
           a.loop == b.loop;
  }
};

/// Kind-specific precondition. Throws Error for a location that does not exist.
bool can_apply(const DataflowGraph& graph, const Transformation& t);

/// Rewrites the graph in place and bumps its version. Throws Error when the
/// transformation was matched on another version or does not apply.
void apply(DataflowGraph& graph, const Transformation& t);

/// Every applicable (kind, location) pair, in a fixed order, bound to the
/// current graph version.
std::vector<Transformation> list_applicable(const DataflowGraph& graph);

nlohmann::json transformation_to_json(const Transformation& t);
Transformation transformation_from_json(const nlohmann::json& j);

// Pieces shared with the driver passes.
bool constant_propagation_changes(const DataflowGraph& graph);
void constant_propagation(DataflowGraph& graph);
bool dead_branches_present(const DataflowGraph& graph);
void dead_branch_elimination(DataflowGraph& graph);
bool loop_unrollable(const DataflowGraph& graph, int loop);
void loop_unroll(DataflowGraph& graph, int loop);

/// Rewrites pow with exponents that are integers in [-8, 8] or 0.5 into
/// multiplies, reciprocals and sqrt. Returns the number of pow nodes replaced.
int rewrite_powers(Expr& e);
int count_rewritable_powers(const Expr& e);

}  // namespace sf
