#include "sf/ir/graph.hpp"

namespace sf {

std::map<std::string, Movement> query_movement(const DataflowGraph& g, const StencilNode& node) {
  std::map<std::string, Movement> out;
  for (const auto& m : node.memlets) {
    if (node.schedule.cache_of(m.container) != CacheKind::None) continue;
    const auto& c = g.container(m.container);
    for (const auto& b : m.subset)
      if (!c.shape_box(g.domain).contains(b))
        throw Error("movement", "memlet on '" + m.container + "' exceeds the container shape");
    const std::int64_t bytes = m.volume * element_size(c.element);
    auto& mv = out[m.container];
    (m.write ? mv.write_bytes : mv.read_bytes) += bytes;
  }
  return out;
}

std::map<std::string, Movement> query_movement(const DataflowGraph& g, int state) {
  std::map<std::string, Movement> out;
  for (const auto& n : g.states.at(std::size_t(state)).nodes)
    for (const auto& [k, v] : query_movement(g, n)) {
      out[k].read_bytes += v.read_bytes;
      out[k].write_bytes += v.write_bytes;
    }
  return out;
}

std::map<std::string, Movement> movement_totals(const DataflowGraph& g) {
  std::map<std::string, Movement> out;
  for (const auto& e : unrolled_trace(g))
    for (const auto& [k, v] : query_movement(g, g.states[std::size_t(e.state)].nodes[std::size_t(e.node)])) {
      out[k].read_bytes += v.read_bytes;
      out[k].write_bytes += v.write_bytes;
    }
  return out;
}

}  // namespace sf
