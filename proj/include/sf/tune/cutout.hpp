#pragma once

#include <string>
#include <vector>

#include "sf/ir/graph.hpp"

namespace sf {

/// Contiguous run of nodes of one state.
struct Cutout {
  std::string id;  // member node names joined by ','
  int state = 0;
  int first = 0;
  int count = 0;
  std::vector<std::string> names;
};

/// All runs of length 1..l_max per state, states in order, then by start and
/// length.
std::vector<Cutout> enumerate_cutouts(const DataflowGraph& graph, int l_max = 4);

/// Standalone single-state graph of nodes [first, first + count) of `state`.
/// Containers touched outside the run become non-transient inputs/outputs;
/// call-site bindings are frozen to their values at the first invocation.
DataflowGraph extract_cutout(const DataflowGraph& graph, int state, int first, int count);
DataflowGraph extract_cutout(const DataflowGraph& graph, const Cutout& cutout);

}  // namespace sf
