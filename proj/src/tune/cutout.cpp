#include "sf/tune/cutout.hpp"

namespace sf {

std::vector<Cutout> enumerate_cutouts(const DataflowGraph& g, int l_max) {
  if (l_max < 1) throw Error("config", "l_max must be positive");
  std::vector<Cutout> out;
  for (std::size_t s = 0; s < g.states.size(); ++s) {
    const auto& nodes = g.states[s].nodes;
    for (std::size_t a = 0; a < nodes.size(); ++a)
      for (std::size_t len = 1; len <= std::size_t(l_max) && a + len <= nodes.size(); ++len) {
        Cutout c;
        c.state = int(s);
        c.first = int(a);
        c.count = int(len);
        for (std::size_t n = a; n < a + len; ++n) {
          c.names.push_back(nodes[n].name);
          c.id += (c.id.empty() ? "" : ",") + nodes[n].name;
        }
        out.push_back(std::move(c));
      }
  }
  return out;
}

DataflowGraph extract_cutout(const DataflowGraph& g, int state, int first, int count) {
  if (state < 0 || std::size_t(state) >= g.states.size()) throw Error("unknown location", "no such state");
  const auto& nodes = g.states[std::size_t(state)].nodes;
  if (first < 0 || count < 1 || std::size_t(first + count) > nodes.size())
    throw Error("unknown location", "cutout outside the state");

  std::set<std::string> inside, outside;
  for (std::size_t s = 0; s < g.states.size(); ++s)
    for (std::size_t n = 0; n < g.states[s].nodes.size(); ++n) {
      const auto& node = g.states[s].nodes[n];
      const bool in = int(s) == state && int(n) >= first && int(n) < first + count;
      auto& dst = in ? inside : outside;
      for (const auto& f : node.reads()) dst.insert(f);
      for (const auto& f : node.writes()) dst.insert(f);
    }

  // Bindings as seen by the first invocation of each node.
  std::map<int, std::map<std::string, double>> env;
  try {
    for (const auto& e : unrolled_trace(g))
      if (e.state == state && e.node >= first && e.node < first + count) env.try_emplace(e.node, e.params);
  } catch (const Error&) {
    // unresolvable trace: keep symbolic bindings
  }

  DataflowGraph out;
  out.domain = g.domain;
  out.configs = g.configs;
  out.params = g.params;
  for (const auto& c : g.arrays) {
    if (!inside.count(c.name)) continue;
    Container k = c;
    if (outside.count(c.name)) k.transient = false;
    out.arrays.push_back(k);
  }
  DataflowState st;
  st.label = "cutout";
  for (int n = first; n < first + count; ++n) {
    StencilNode node = nodes[std::size_t(n)];
    auto it = env.find(n);
    if (it != env.end())
      for (auto& [k, v] : node.bindings) {
        auto p = it->second.find(k);
        if (p != it->second.end()) v = Expr::literal(p->second);
      }
    st.nodes.push_back(std::move(node));
  }
  out.states.push_back(std::move(st));
  rebuild_all(out);
  return out;
}

DataflowGraph extract_cutout(const DataflowGraph& g, const Cutout& c) {
  return extract_cutout(g, c.state, c.first, c.count);
}

}  // namespace sf
