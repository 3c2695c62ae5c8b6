#include <queue>

#include "sf/ir/graph.hpp"

namespace sf {

std::vector<Diagnostic> validate_graph(const DataflowGraph& g) {
  std::vector<Diagnostic> out;
  auto report = [&](const char* cat, std::string msg) { out.push_back({cat, std::move(msg), {}}); };
  const int ns = int(g.states.size());
  if (ns == 0) {
    report("graph structure", "graph has no states");
    return out;
  }
  if (g.start < 0 || g.start >= ns) report("graph structure", "start state out of range");

  std::vector<int> incoming(std::size_t(ns), 0);
  for (const auto& t : g.transitions) {
    if (t.from < 0 || t.from >= ns || t.to < 0 || t.to >= ns) {
      report("graph structure", "transition endpoint out of range");
      continue;
    }
    ++incoming[std::size_t(t.to)];
  }
  for (int s = 0; s < ns; ++s)
    if (s != g.start && incoming[std::size_t(s)] == 0)
      report("graph structure", "state " + g.states[std::size_t(s)].label + " has no incoming transition");

  for (const auto& st : g.states) {
    const int nn = int(st.nodes.size());
    std::vector<std::vector<int>> succ(static_cast<std::size_t>(nn));
    std::vector<int> indeg(std::size_t(nn), 0);
    for (const auto& [a, b] : st.edges) {
      if (a < 0 || a >= nn || b < 0 || b >= nn) {
        report("graph structure", "edge endpoint out of range in state " + st.label);
        continue;
      }
      succ[std::size_t(a)].push_back(b);
      ++indeg[std::size_t(b)];
    }
    std::queue<int> q;
    for (int i = 0; i < nn; ++i)
      if (indeg[std::size_t(i)] == 0) q.push(i);
    int seen = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      ++seen;
      for (int w : succ[std::size_t(v)])
        if (--indeg[std::size_t(w)] == 0) q.push(w);
    }
    if (seen != nn) report("acyclicity", "dataflow cycle in state " + st.label);

    for (const auto& n : st.nodes) {
      if (n.boxes.size() != n.blocks.size())
        report("graph structure", "node " + n.name + " has inconsistent statement boxes");
      for (const auto& f : n.reads())
        if (!g.find_container(f)) report("unknown container", "node " + n.name + " reads unknown '" + f + "'");
      for (const auto& f : n.writes())
        if (!g.find_container(f)) report("unknown container", "node " + n.name + " writes unknown '" + f + "'");
      for (const auto& m : n.memlets) {
        const auto* c = g.find_container(m.container);
        if (!c) {
          report("unknown container", "memlet of " + n.name + " names unknown '" + m.container + "'");
          continue;
        }
        const Box shape = c->shape_box(g.domain);
        for (const auto& b : m.subset)
          if (!shape.contains(b))
            report("memlet bounds", "memlet of " + n.name + " on '" + m.container +
                                        "' exceeds the container shape");
        if (m.volume != union_volume(m.subset))
          report("memlet bounds", "memlet of " + n.name + " on '" + m.container + "' has a stale volume");
      }
    }
  }
  return out;
}

}  // namespace sf
