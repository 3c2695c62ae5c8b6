#pragma once

#include <string>
#include <vector>

#include "sf/ir/graph.hpp"
#include "sf/sched/schedule.hpp"

namespace sf {

/// A maximal run of statements of one block whose mutual dependences are all
/// pointwise in the horizontal. Statements of a section execute together per
/// point.
struct Section {
  int block = 0;
  std::vector<int> stmts;
  bool split = false;  // region statements run as their own kernel
};

/// Sections of a node under a region strategy, numbered globally in block order.
std::vector<Section> node_sections(const StencilNode& node, RegionStrategy strategy);

/// One ordered pair of statement instances touching the same container.
struct Dependence {
  std::string field;
  int first_block = 0, first_stmt = 0;   // executes first in the reference order
  int second_block = 0, second_stmt = 0;
  Offset delta;       // second point minus first point
  bool ij_field = false;
};

std::vector<Dependence> node_dependences(const StencilNode& node, const DataflowGraph& graph);

struct Validity {
  bool ok = true;
  std::string reason;
};

Validity schedule_validity(const StencilNode& node, const DataflowGraph& graph, const Schedule& s);

/// Order-level dependence check only (no caches, tiles, regions).
bool order_respects_dependences(const StencilNode& node, const DataflowGraph& graph,
                                const DimOrder& order, const std::array<bool, 3>& map,
                                RegionStrategy strategy);

/// True when every read of `field` is served by an earlier unconditional write
/// of the same section covering the reader (the value can stay in registers).
bool forward_ok(const StencilNode& node, RegionStrategy strategy, const std::string& field);

/// Fastest feasible cache storage for `field` under `s`, or None.
CacheKind feasible_cache(const StencilNode& node, const DataflowGraph& graph, const Schedule& s,
                         const std::string& field);

/// Heuristic default: horizontal stencils iterate [Interval, Operation, K, J, I]
/// with all dims mapped; vertical solvers [J, I, Interval, Operation, K] with K
/// a loop. Caches take the fastest feasible storage.
Schedule default_schedule(const StencilNode& node, const DataflowGraph& graph,
                          bool with_caches = true);

/// Candidate cache fields of a node: transient containers it accesses.
std::vector<std::string> cache_candidates(const StencilNode& node, const DataflowGraph& graph);

struct ScheduleMenu {
  std::vector<int> tiles{0, 4, 8, 32};
};

/// Every valid schedule of the node over the Cartesian space
/// order x map flags x tile menu x cache kinds x region strategy.
std::vector<Schedule> enumerate_schedules(const StencilNode& node, const DataflowGraph& graph,
                                          const ScheduleMenu& menu = {});

}  // namespace sf
