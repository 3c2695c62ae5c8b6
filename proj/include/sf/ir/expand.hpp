#pragma once

#include <string>
#include <vector>

#include "sf/ir/graph.hpp"
#include "sf/sched/validity.hpp"

namespace sf {

/// One loop level of an expanded node, outermost first.
struct PlanLevel {
  enum class Kind { Tile, Spatial, Group } kind = Kind::Spatial;
  Dim dim = Dim::I;  // Tile / Spatial
  bool map = false;
  int tile = 0;  // Tile: size
};

/// A run of sections executed by one loop nest. Split region sections get a
/// phase of their own with the Interval/Operation group outermost.
struct PlanPhase {
  std::vector<int> sections;
  Box hull;
  bool split = false;
  std::vector<PlanLevel> declared;  // loop nest as scheduled
  std::vector<PlanLevel> levels;    // loop nest as executed
  bool vectorized = false;          // innermost spatial level runs as a row
  int parallel = -1;                // index into levels of the worker-parallel level
  int k_dir = 1;                    // K direction when K is outside the group
};

/// Expanded stencil node: sections, phases and their loop nests.
struct KernelPlan {
  Schedule schedule;
  std::vector<Section> sections;
  std::vector<Box> section_hulls;
  std::vector<PlanPhase> phases;
};

/// Expands a node under its schedule. Throws Error when the schedule is
/// invalid for the node.
KernelPlan expand(const StencilNode& node, const DataflowGraph& graph);

/// Map scopes without a map ancestor, counted over the static scope tree.
int kernel_count(const KernelPlan& plan);
int kernel_count(const DataflowGraph& graph);

/// Points visited by the innermost loops of the node (per invocation).
std::int64_t worker_iterations(const KernelPlan& plan);

/// Indented scope-tree text of the expansion.
std::string describe_plan(const StencilNode& node, const KernelPlan& plan);

}  // namespace sf
