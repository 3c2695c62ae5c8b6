#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sf/frontend/ast.hpp"
#include "sf/frontend/extents.hpp"
#include "sf/sched/schedule.hpp"

namespace sf {

/// Data container in the graph catalog. Shape is the domain plus halo.
struct Container {
  std::string name;
  bool has_k = true;
  ElementType element = ElementType::Float64;
  bool transient = false;
  Extent halo;

  Box shape_box(const Domain& d) const;
};

/// Data-movement descriptor between a stencil node and a container. The
/// subset is a union of boxes; volume counts each element once.
struct Memlet {
  std::string container;
  bool write = false;
  std::vector<Box> subset;
  std::int64_t volume = 0;
};

/// Schedulable stencil library node. One node per computation block after
/// lowering; fusion merges nodes and joins member names with '+'.
struct StencilNode {
  std::string name;
  std::vector<std::string> members;
  std::vector<ComputationBlock> blocks;
  std::vector<std::vector<Box>> boxes;                  // per block, per statement
  std::vector<std::pair<std::string, Expr>> bindings;  // call-site parameter bindings
  Schedule schedule;
  std::set<std::string> forwarded;  // reads served from an earlier write in the same section
  std::set<std::string> carried;    // values kept in registers across K iterations
  std::vector<Memlet> memlets;

  bool has_regions() const;
  bool vertical() const;  // any FORWARD/BACKWARD block
  std::set<std::string> reads() const;
  std::set<std::string> writes() const;
};

struct DataflowState {
  std::string label;
  std::vector<StencilNode> nodes;
  std::vector<std::pair<int, int>> edges;  // dataflow order between nodes
};

struct Transition {
  int from = 0;
  int to = 0;
  Expr condition = Expr::literal(1, true);
  std::vector<std::pair<std::string, Expr>> assignments;

  bool unconditional() const { return condition.is_literal() && condition.value != 0.0; }
};

/// Counted driver loop kept symbolic in the state machine.
struct LoopInfo {
  std::string var;
  int guard = 0;
  std::vector<int> body;  // states inside the loop, in creation order
  int exit = 0;
  Expr trip;
  bool unroll = false;
};

struct DataflowGraph {
  Domain domain;
  std::vector<Container> arrays;
  std::vector<DataflowState> states;
  std::vector<Transition> transitions;
  std::vector<LoopInfo> loops;
  std::vector<ConfigDecl> configs;
  std::vector<ParamDecl> params;
  int start = 0;
  std::uint64_t version = 0;

  const Container* find_container(const std::string& name) const;
  Container* find_container(const std::string& name);
  const Container& container(const std::string& name) const;
  std::size_t node_count() const;
};

/// Recomputes the memlets of a node from its statements and boxes.
void rebuild_memlets(StencilNode& node, const DataflowGraph& graph);
/// Recomputes dataflow edges of a state from its nodes' memlets.
void rebuild_edges(DataflowState& state);
/// Recomputes both for every node and state.
void rebuild_all(DataflowGraph& graph);

/// Lowers a validated program onto a concrete domain. Nodes carry the
/// default schedule without cache directives.
DataflowGraph lower(const StencilProgram& program, const Domain& domain);

/// Applies default_schedule (including caches) to every node.
void assign_default_schedules(DataflowGraph& graph);

/// One executed node instance in the resolved state-machine trace.
struct TraceEntry {
  int state = 0;
  int node = 0;
  std::map<std::string, double> params;  // scalar environment seen by the node
};

std::vector<TraceEntry> unrolled_trace(const DataflowGraph& graph);

/// Per-container byte counts.
struct Movement {
  std::int64_t read_bytes = 0;
  std::int64_t write_bytes = 0;
  friend bool operator==(const Movement&, const Movement&) = default;
};

std::map<std::string, Movement> query_movement(const DataflowGraph& g, const StencilNode& node);
std::map<std::string, Movement> query_movement(const DataflowGraph& g, int state);
/// Totals over the unrolled trace.
std::map<std::string, Movement> movement_totals(const DataflowGraph& g);

std::vector<Diagnostic> validate_graph(const DataflowGraph& graph);

nlohmann::json graph_to_json(const DataflowGraph& graph);
DataflowGraph graph_from_json(const nlohmann::json& j);
bool same_graph(const DataflowGraph& a, const DataflowGraph& b);

}  // namespace sf
