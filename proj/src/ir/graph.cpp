#include "sf/ir/graph.hpp"

#include <algorithm>

namespace sf {

Box Container::shape_box(const Domain& d) const {
  Box b;
  b.r[0] = {halo.lo[0], d.ni + halo.hi[0]};
  b.r[1] = {halo.lo[1], d.nj + halo.hi[1]};
  b.r[2] = has_k ? Range{halo.lo[2], d.nk + halo.hi[2]} : Range{0, 1};
  return b;
}

bool StencilNode::has_regions() const {
  for (const auto& b : blocks)
    for (const auto& s : b.statements)
      if (s.region) return true;
  return false;
}

bool StencilNode::vertical() const {
  for (const auto& b : blocks)
    if (b.policy != Policy::Parallel) return true;
  return false;
}

std::set<std::string> StencilNode::reads() const {
  std::set<std::string> out;
  for (const auto& b : blocks)
    for (const auto& s : b.statements)
      for (const auto& r : field_reads(s.value)) out.insert(r.first);
  return out;
}

std::set<std::string> StencilNode::writes() const {
  std::set<std::string> out;
  for (const auto& b : blocks)
    for (const auto& s : b.statements) out.insert(s.target);
  return out;
}

const Container* DataflowGraph::find_container(const std::string& name) const {
  for (const auto& c : arrays)
    if (c.name == name) return &c;
  return nullptr;
}

Container* DataflowGraph::find_container(const std::string& name) {
  for (auto& c : arrays)
    if (c.name == name) return &c;
  return nullptr;
}

const Container& DataflowGraph::container(const std::string& name) const {
  if (const auto* c = find_container(name)) return *c;
  throw InternalError("unknown container '" + name + "'");
}

std::size_t DataflowGraph::node_count() const {
  std::size_t n = 0;
  for (const auto& s : states) n += s.nodes.size();
  return n;
}

void rebuild_memlets(StencilNode& node, const DataflowGraph& graph) {
  std::map<std::pair<std::string, bool>, std::vector<Box>> subsets;
  for (std::size_t bi = 0; bi < node.blocks.size(); ++bi) {
    const auto& b = node.blocks[bi];
    for (std::size_t si = 0; si < b.statements.size(); ++si) {
      const auto& st = b.statements[si];
      const Box& box = node.boxes[bi][si];
      const auto* target = graph.find_container(st.target);
      auto& w = subsets[{st.target, true}];
      if (!box.empty()) w.push_back(access_box(box, {}, !target || target->has_k));
      for (const auto& [f, o] : field_reads(st.value)) {
        if (node.forwarded.count(f)) continue;
        const auto* c = graph.find_container(f);
        auto& r = subsets[{f, false}];
        if (!box.empty()) r.push_back(access_box(box, o, !c || c->has_k));
      }
    }
  }
  node.memlets.clear();
  for (auto& [key, boxes] : subsets) {
    Memlet m;
    m.container = key.first;
    m.write = key.second;
    m.volume = union_volume(boxes);
    m.subset = std::move(boxes);
    node.memlets.push_back(std::move(m));
  }
}

void rebuild_edges(DataflowState& state) {
  state.edges.clear();
  for (std::size_t a = 0; a < state.nodes.size(); ++a) {
    const auto wa = state.nodes[a].writes();
    const auto ra = state.nodes[a].reads();
    for (std::size_t b = a + 1; b < state.nodes.size(); ++b) {
      bool dep = false;
      for (const auto& f : state.nodes[b].reads()) dep = dep || wa.count(f);
      for (const auto& f : state.nodes[b].writes()) dep = dep || wa.count(f) || ra.count(f);
      if (dep) state.edges.emplace_back(int(a), int(b));
    }
  }
}

void rebuild_all(DataflowGraph& graph) {
  for (auto& s : graph.states) {
    for (auto& n : s.nodes) rebuild_memlets(n, graph);
    rebuild_edges(s);
  }
}

}  // namespace sf
