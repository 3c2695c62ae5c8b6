#include "sf/frontend/ast_json.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json box_json(const Box& b) {
  return json::array({json::array({b.r[0].lo, b.r[0].hi}), json::array({b.r[1].lo, b.r[1].hi}),
                      json::array({b.r[2].lo, b.r[2].hi})});
}

Box box_from(const json& j) {
  Box b;
  for (int d = 0; d < 3; ++d) b.r[std::size_t(d)] = {j[std::size_t(d)][0].get<std::int64_t>(), j[std::size_t(d)][1].get<std::int64_t>()};
  return b;
}

json extent_json(const Extent& e) { return {{"lo", e.lo}, {"hi", e.hi}}; }

Extent extent_from(const json& j) {
  Extent e;
  e.lo = j["lo"].get<std::array<int, 3>>();
  e.hi = j["hi"].get<std::array<int, 3>>();
  return e;
}

json assigns_json(const std::vector<std::pair<std::string, Expr>>& a) {
  json out = json::array();
  for (const auto& [k, v] : a) out.push_back({{"name", k}, {"value", expr_to_json(v)}});
  return out;
}

std::vector<std::pair<std::string, Expr>> assigns_from(const json& j) {
  std::vector<std::pair<std::string, Expr>> out;
  for (const auto& a : j) out.emplace_back(a["name"].get<std::string>(), expr_from_json(a["value"]));
  return out;
}

SDim sdim_from(const std::string& s) {
  for (int k = 0; k < 5; ++k)
    if (s == sdim_name(SDim(k))) return SDim(k);
  throw Error("format error", "unknown schedule dimension '" + s + "'");
}

json schedule_json(const Schedule& s) {
  json order = json::array();
  for (SDim d : s.order) order.push_back(sdim_name(d));
  json caches = json::object();
  for (const auto& [f, c] : s.caches) caches[f] = cache_name(c);
  return {{"order", order},
          {"map", s.map},
          {"tile", s.tile},
          {"caches", caches},
          {"region", s.region == RegionStrategy::Split ? "split" : "predicated"}};
}

Schedule schedule_from(const json& j) {
  Schedule s;
  for (std::size_t k = 0; k < 5; ++k) s.order[k] = sdim_from(j["order"][k]);
  s.map = j["map"].get<std::array<bool, 3>>();
  s.tile = j["tile"].get<std::array<int, 3>>();
  for (const auto& [f, c] : j["caches"].items())
    s.caches[f] = c == "local" ? CacheKind::Local : c == "shared" ? CacheKind::Shared : CacheKind::None;
  s.region = j["region"] == "split" ? RegionStrategy::Split : RegionStrategy::Predicated;
  return s;
}

}  // namespace

json graph_to_json(const DataflowGraph& g) {
  json j;
  j["format"] = "stencilflow-graph";
  j["format_version"] = kFormatVersion;
  j["domain"] = {{"ni", g.domain.ni}, {"nj", g.domain.nj}, {"nk", g.domain.nk},
                 {"owned", {{"west", g.domain.west}, {"east", g.domain.east},
                            {"south", g.domain.south}, {"north", g.domain.north}}}};
  j["arrays"] = json::array();
  for (const auto& c : g.arrays)
    j["arrays"].push_back({{"name", c.name}, {"has_k", c.has_k}, {"element", element_name(c.element)},
                           {"transient", c.transient}, {"halo", extent_json(c.halo)}});
  j["configs"] = json::array();
  for (const auto& c : g.configs)
    j["configs"].push_back({{"name", c.name}, {"value", c.value}, {"integer", c.integer}});
  j["params"] = json::array();
  for (const auto& p : g.params)
    j["params"].push_back({{"name", p.name}, {"values", p.values}, {"array", p.is_array}});
  j["start"] = g.start;
  j["states"] = json::array();
  for (const auto& st : g.states) {
    json nodes = json::array();
    for (const auto& n : st.nodes) {
      json blocks = json::array();
      for (const auto& b : n.blocks) blocks.push_back(block_to_json(b));
      json boxes = json::array();
      for (const auto& bb : n.boxes) {
        json row = json::array();
        for (const auto& b : bb) row.push_back(box_json(b));
        boxes.push_back(row);
      }
      json memlets = json::array();
      for (const auto& m : n.memlets) {
        json subset = json::array();
        for (const auto& b : m.subset) subset.push_back(box_json(b));
        memlets.push_back({{"container", m.container}, {"access", m.write ? "write" : "read"},
                           {"subset", subset}, {"volume", m.volume}});
      }
      nodes.push_back({{"name", n.name},
                       {"members", n.members},
                       {"blocks", blocks},
                       {"boxes", boxes},
                       {"bindings", assigns_json(n.bindings)},
                       {"schedule", schedule_json(n.schedule)},
                       {"forwarded", n.forwarded},
                       {"carried", n.carried},
                       {"memlets", memlets}});
    }
    json edges = json::array();
    for (const auto& [a, b] : st.edges) edges.push_back(json::array({a, b}));
    j["states"].push_back({{"label", st.label}, {"nodes", nodes}, {"edges", edges}});
  }
  j["transitions"] = json::array();
  for (const auto& t : g.transitions)
    j["transitions"].push_back({{"from", t.from}, {"to", t.to}, {"condition", expr_to_json(t.condition)},
                                {"assignments", assigns_json(t.assignments)}});
  j["loops"] = json::array();
  for (const auto& l : g.loops)
    j["loops"].push_back({{"var", l.var}, {"guard", l.guard}, {"body", l.body}, {"exit", l.exit},
                          {"trip", expr_to_json(l.trip)}, {"unroll", l.unroll}});
  j["graph_version"] = g.version;
  return j;
}

DataflowGraph graph_from_json(const json& j) {
  if (j.value("format", "") != "stencilflow-graph")
    throw Error("format error", "not a stencilflow graph document");
  if (j.value("format_version", 0) != kFormatVersion)
    throw Error("format error", "unsupported graph format version");
  DataflowGraph g;
  const auto& d = j["domain"];
  g.domain = {d["ni"], d["nj"], d["nk"], d["owned"]["west"], d["owned"]["east"],
              d["owned"]["south"], d["owned"]["north"]};
  for (const auto& c : j["arrays"])
    g.arrays.push_back({c["name"], c["has_k"],
                        c["element"] == "float32" ? ElementType::Float32 : ElementType::Float64,
                        c["transient"], extent_from(c["halo"])});
  for (const auto& c : j["configs"]) {
    ConfigDecl cd;
    cd.name = c["name"];
    cd.value = c["value"];
    cd.integer = c["integer"];
    g.configs.push_back(cd);
  }
  for (const auto& p : j["params"]) {
    ParamDecl pd;
    pd.name = p["name"];
    pd.values = p["values"].get<std::vector<double>>();
    pd.is_array = p["array"];
    g.params.push_back(pd);
  }
  g.start = j["start"];
  for (const auto& sj : j["states"]) {
    DataflowState st;
    st.label = sj["label"];
    for (const auto& nj : sj["nodes"]) {
      StencilNode n;
      n.name = nj["name"];
      n.members = nj["members"].get<std::vector<std::string>>();
      for (const auto& b : nj["blocks"]) n.blocks.push_back(block_from_json(b));
      for (const auto& row : nj["boxes"]) {
        std::vector<Box> r;
        for (const auto& b : row) r.push_back(box_from(b));
        n.boxes.push_back(std::move(r));
      }
      n.bindings = assigns_from(nj["bindings"]);
      n.schedule = schedule_from(nj["schedule"]);
      n.forwarded = nj["forwarded"].get<std::set<std::string>>();
      n.carried = nj["carried"].get<std::set<std::string>>();
      for (const auto& mj : nj["memlets"]) {
        Memlet m;
        m.container = mj["container"];
        m.write = mj["access"] == "write";
        for (const auto& b : mj["subset"]) m.subset.push_back(box_from(b));
        m.volume = mj["volume"];
        n.memlets.push_back(std::move(m));
      }
      st.nodes.push_back(std::move(n));
    }
    for (const auto& e : sj["edges"]) st.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    g.states.push_back(std::move(st));
  }
  for (const auto& t : j["transitions"])
    g.transitions.push_back({t["from"], t["to"], expr_from_json(t["condition"]), assigns_from(t["assignments"])});
  for (const auto& l : j["loops"])
    g.loops.push_back({l["var"], l["guard"], l["body"].get<std::vector<int>>(), l["exit"],
                       expr_from_json(l["trip"]), l["unroll"]});
  g.version = j.value("graph_version", std::uint64_t(0));
  return g;
}

bool same_graph(const DataflowGraph& a, const DataflowGraph& b) {
  json x = graph_to_json(a);
  json y = graph_to_json(b);
  x.erase("graph_version");
  y.erase("graph_version");
  return x == y;
}

}  // namespace sf
