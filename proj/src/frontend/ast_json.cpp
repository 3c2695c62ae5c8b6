#include "sf/frontend/ast_json.hpp"

namespace sf {

using nlohmann::json;

namespace {

json loc_json(SourceLoc l) { return json::array({l.line, l.col}); }

json level_json(const Level& l) {
  return {{"anchor", l.anchor == Level::Anchor::Start ? "start" : "end"}, {"offset", l.offset}};
}

json bound_json(const std::optional<AxisBound>& b) {
  if (!b) return nullptr;
  return {{"anchor", b->anchor == AxisBound::Anchor::Start ? "start" : "end"}, {"offset", b->offset}};
}

json axis_json(const AxisConstraint& c) {
  if (c.full) return "full";
  return {{"point", c.point}, {"lo", bound_json(c.lo)}, {"hi", bound_json(c.hi)}};
}

json driver_json(const std::vector<DriverStmt>& body) {
  json out = json::array();
  for (const auto& d : body) {
    json j;
    switch (d.kind) {
      case DriverStmt::Kind::Call: {
        j["kind"] = "call";
        j["stencil"] = d.name;
        json args = json::object();
        for (const auto& [k, v] : d.args) args[k] = expr_to_json(v);
        j["args"] = args;
        break;
      }
      case DriverStmt::Kind::Assign:
        j = {{"kind", "assign"}, {"name", d.name}, {"value", expr_to_json(d.value)}};
        break;
      case DriverStmt::Kind::For:
        j = {{"kind", "for"}, {"var", d.name}, {"trip", expr_to_json(d.value)},
             {"unroll", d.unroll}, {"body", driver_json(d.body)}};
        break;
      case DriverStmt::Kind::If:
        j = {{"kind", "if"}, {"cond", expr_to_json(d.value)}, {"then", driver_json(d.body)},
             {"else", driver_json(d.orelse)}};
        break;
    }
    j["loc"] = loc_json(d.loc);
    out.push_back(j);
  }
  return out;
}

}  // namespace

json expr_to_json(const Expr& e) {
  json j;
  switch (e.kind) {
    case ExprKind::Literal:
      j = {{"kind", "literal"}, {"value", e.value}, {"integer", e.integer}};
      break;
    case ExprKind::Name:
      j = {{"kind", "name"}, {"name", e.name}};
      break;
    case ExprKind::FieldRef:
      j = {{"kind", "field"}, {"name", e.name},
           {"offset", json::array({e.offset.di, e.offset.dj, e.offset.dk})}};
      break;
    case ExprKind::Index:
      j = {{"kind", "index"}, {"name", e.name}, {"index", expr_to_json(e.args[0])}};
      break;
    case ExprKind::Unary:
      j = {{"kind", "unary"}, {"op", e.uop == UnaryOp::Neg ? "-" : "not"},
           {"arg", expr_to_json(e.args[0])}};
      break;
    case ExprKind::Binary:
      j = {{"kind", "binary"}, {"op", binary_op_token(e.bop)},
           {"lhs", expr_to_json(e.args[0])}, {"rhs", expr_to_json(e.args[1])}};
      break;
    case ExprKind::Call: {
      json args = json::array();
      for (const auto& a : e.args) args.push_back(expr_to_json(a));
      j = {{"kind", "call"}, {"fn", builtin_name(e.fn)}, {"args", args}};
      break;
    }
    case ExprKind::Select:
      j = {{"kind", "select"}, {"cond", expr_to_json(e.args[0])},
           {"then", expr_to_json(e.args[1])}, {"else", expr_to_json(e.args[2])}};
      break;
  }
  j["loc"] = loc_json(e.loc);
  return j;
}

json program_to_json(const StencilProgram& p) {
  json j;
  j["fields"] = json::array();
  for (const auto& f : p.fields)
    j["fields"].push_back({{"name", f.name},
                           {"dims", f.has_k ? json::array({"I", "J", "K"}) : json::array({"I", "J"})},
                           {"element", element_name(f.element)},
                           {"temporary", f.temporary},
                           {"loc", loc_json(f.loc)}});
  j["params"] = json::array();
  for (const auto& c : p.params)
    j["params"].push_back({{"name", c.name}, {"values", c.values}, {"array", c.is_array},
                           {"loc", loc_json(c.loc)}});
  j["configs"] = json::array();
  for (const auto& c : p.configs)
    j["configs"].push_back({{"name", c.name}, {"value", c.value}, {"loc", loc_json(c.loc)}});
  j["stencils"] = json::array();
  for (const auto& s : p.stencils) {
    json blocks = json::array();
    for (const auto& b : s.blocks) blocks.push_back(block_to_json(b));
    j["stencils"].push_back({{"name", s.name}, {"blocks", blocks}, {"loc", loc_json(s.loc)}});
  }
  j["driver"] = driver_json(p.driver);
  return j;
}

}  // namespace sf

namespace sf {

namespace {

SourceLoc loc_from(const json& j) {
  if (!j.contains("loc")) return {};
  return {j["loc"][0].get<int>(), j["loc"][1].get<int>()};
}

Level level_from(const json& j) {
  return {j["anchor"] == "start" ? Level::Anchor::Start : Level::Anchor::End, j["offset"].get<int>()};
}

std::optional<AxisBound> bound_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return AxisBound{j["anchor"] == "start" ? AxisBound::Anchor::Start : AxisBound::Anchor::End,
                   j["offset"].get<int>()};
}

AxisConstraint axis_from(const json& j) {
  AxisConstraint c;
  if (j.is_string()) return c;
  c.full = false;
  c.point = j["point"].get<bool>();
  c.lo = bound_from(j["lo"]);
  c.hi = bound_from(j["hi"]);
  return c;
}

BinaryOp binary_from(const std::string& t) {
  for (int k = 0; k <= int(BinaryOp::Or); ++k)
    if (t == binary_op_token(BinaryOp(k))) return BinaryOp(k);
  throw Error("format error", "unknown operator '" + t + "'");
}

}  // namespace

Expr expr_from_json(const json& j) {
  const std::string kind = j.at("kind");
  Expr e;
  if (kind == "literal") {
    e = Expr::literal(j["value"].get<double>(), j["integer"].get<bool>());
  } else if (kind == "name") {
    e = Expr::make_name(j["name"]);
  } else if (kind == "field") {
    e = Expr::field(j["name"], Offset{j["offset"][0], j["offset"][1], j["offset"][2]});
  } else if (kind == "index") {
    e = Expr::index(j["name"], expr_from_json(j["index"]));
  } else if (kind == "unary") {
    e = Expr::unary(j["op"] == "-" ? UnaryOp::Neg : UnaryOp::Not, expr_from_json(j["arg"]));
  } else if (kind == "binary") {
    e = Expr::binary(binary_from(j["op"]), expr_from_json(j["lhs"]), expr_from_json(j["rhs"]));
  } else if (kind == "call") {
    std::vector<Expr> args;
    for (const auto& a : j["args"]) args.push_back(expr_from_json(a));
    auto fn = builtin_from_name(j["fn"]);
    if (!fn) throw Error("format error", "unknown builtin");
    e = Expr::call(*fn, std::move(args));
  } else if (kind == "select") {
    e = Expr::select(expr_from_json(j["cond"]), expr_from_json(j["then"]), expr_from_json(j["else"]));
  } else {
    throw Error("format error", "unknown expression kind '" + kind + "'");
  }
  e.loc = loc_from(j);
  return e;
}

json block_to_json(const ComputationBlock& b) {
  json stmts = json::array();
  for (const auto& st : b.statements) {
    json sj = {{"target", st.target}, {"value", expr_to_json(st.value)}, {"loc", loc_json(st.loc)}};
    if (st.region) sj["region"] = {{"i", axis_json(st.region->i)}, {"j", axis_json(st.region->j)}};
    stmts.push_back(sj);
  }
  return {{"policy", policy_name(b.policy)},
          {"computation", b.computation},
          {"interval", {{"start", level_json(b.interval.start)}, {"end", level_json(b.interval.end)}}},
          {"statements", stmts},
          {"loc", loc_json(b.loc)}};
}

ComputationBlock block_from_json(const json& j) {
  ComputationBlock b;
  const std::string p = j.at("policy");
  b.policy = p == "PARALLEL" ? Policy::Parallel : p == "FORWARD" ? Policy::Forward : Policy::Backward;
  b.computation = j.value("computation", 0);
  b.interval.start = level_from(j["interval"]["start"]);
  b.interval.end = level_from(j["interval"]["end"]);
  for (const auto& sj : j["statements"]) {
    Statement st;
    st.target = sj["target"];
    st.value = expr_from_json(sj["value"]);
    st.loc = loc_from(sj);
    if (sj.contains("region")) st.region = HorizontalRegion{axis_from(sj["region"]["i"]), axis_from(sj["region"]["j"])};
    b.statements.push_back(std::move(st));
  }
  b.loc = loc_from(j);
  return b;
}

}  // namespace sf
