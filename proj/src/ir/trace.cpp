#include "sf/ir/graph.hpp"

namespace sf {

std::vector<TraceEntry> unrolled_trace(const DataflowGraph& g) {
  std::map<std::string, double> env;
  for (const auto& c : g.configs) env[c.name] = c.value;
  for (const auto& p : g.params)
    if (!p.is_array) env[p.name] = p.values.at(0);

  NameLookup names = [&](const std::string& n) -> std::optional<double> {
    auto it = env.find(n);
    if (it == env.end()) return std::nullopt;
    return it->second;
  };
  IndexLookup index = [&](const std::string& n, long i) -> std::optional<double> {
    for (const auto& p : g.params)
      if (p.name == n && i >= 0 && std::size_t(i) < p.values.size()) return p.values[std::size_t(i)];
    return std::nullopt;
  };

  std::vector<TraceEntry> out;
  if (g.states.empty()) return out;
  int state = g.start;
  for (std::size_t steps = 0;; ++steps) {
    if (steps > 10000000) throw Error("unresolvable control flow", "state machine does not terminate");
    const auto& st = g.states.at(std::size_t(state));
    for (std::size_t n = 0; n < st.nodes.size(); ++n) {
      TraceEntry e{state, int(n), env};
      for (const auto& [k, v] : st.nodes[n].bindings) e.params[k] = eval_scalar(v, names, index);
      out.push_back(std::move(e));
    }
    const Transition* next = nullptr;
    for (const auto& t : g.transitions) {
      if (t.from != state) continue;
      if (eval_scalar(t.condition, names, index) != 0.0) {
        next = &t;
        break;
      }
    }
    if (!next) break;
    for (const auto& [k, v] : next->assignments) env[k] = eval_scalar(v, names, index);
    state = next->to;
  }
  return out;
}

}  // namespace sf
