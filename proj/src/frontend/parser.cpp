#include "sf/frontend/parser.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <fstream>
#include <sstream>

namespace sf {

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::Parallel: return "PARALLEL";
    case Policy::Forward: return "FORWARD";
    case Policy::Backward: return "BACKWARD";
  }
  return "?";
}

const FieldDecl* StencilProgram::find_field(const std::string& n) const {
  for (const auto& f : fields)
    if (f.name == n) return &f;
  return nullptr;
}
const ParamDecl* StencilProgram::find_param(const std::string& n) const {
  for (const auto& p : params)
    if (p.name == n) return &p;
  return nullptr;
}
const ConfigDecl* StencilProgram::find_config(const std::string& n) const {
  for (const auto& c : configs)
    if (c.name == n) return &c;
  return nullptr;
}
const StencilDef* StencilProgram::find_stencil(const std::string& n) const {
  for (const auto& s : stencils)
    if (s.name == n) return &s;
  return nullptr;
}

namespace {

enum class Tok { Ident, Number, Op, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceLoc loc;
};

struct Line {
  int indent = 0;
  int number = 0;
  std::vector<Token> tokens;
};

[[noreturn]] void syntax(const std::string& msg, SourceLoc loc) {
  throw Error("syntax error", msg, loc);
}

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  int lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++lineno;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    Line line;
    line.number = lineno;
    std::size_t c = 0;
    while (c < raw.size() && (raw[c] == ' ' || raw[c] == '\t')) {
      if (raw[c] == '\t') syntax("tabs are not allowed for indentation", {lineno, int(c) + 1});
      ++c;
    }
    line.indent = int(c);
    while (c < raw.size()) {
      const char ch = raw[c];
      SourceLoc loc{lineno, int(c) + 1};
      if (ch == '#') break;
      if (ch == ' ' || ch == '\t') {
        ++c;
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
        std::size_t s = c;
        while (c < raw.size() && (std::isalnum(static_cast<unsigned char>(raw[c])) || raw[c] == '_')) ++c;
        line.tokens.push_back({Tok::Ident, std::string(raw.substr(s, c - s)), loc});
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(ch)) ||
          (ch == '.' && c + 1 < raw.size() && std::isdigit(static_cast<unsigned char>(raw[c + 1])))) {
        std::size_t s = c;
        while (c < raw.size() && (std::isdigit(static_cast<unsigned char>(raw[c])) || raw[c] == '.')) ++c;
        if (c < raw.size() && (raw[c] == 'e' || raw[c] == 'E')) {
          ++c;
          if (c < raw.size() && (raw[c] == '+' || raw[c] == '-')) ++c;
          while (c < raw.size() && std::isdigit(static_cast<unsigned char>(raw[c]))) ++c;
        }
        line.tokens.push_back({Tok::Number, std::string(raw.substr(s, c - s)), loc});
        continue;
      }
      static const char* two[] = {"**", "<=", ">=", "==", "!="};
      bool matched = false;
      for (const char* t : two) {
        if (raw.substr(c, 2) == t) {
          line.tokens.push_back({Tok::Op, t, loc});
          c += 2;
          matched = true;
          break;
        }
      }
      if (matched) continue;
      if (raw.substr(c, 3) == "...") {
        line.tokens.push_back({Tok::Op, "...", loc});
        c += 3;
        continue;
      }
      if (std::string_view("()[],:=+-*/<>").find(ch) != std::string_view::npos) {
        line.tokens.push_back({Tok::Op, std::string(1, ch), loc});
        ++c;
        continue;
      }
      syntax(std::string("unexpected character '") + ch + "'", loc);
    }
    if (!line.tokens.empty()) {
      line.tokens.push_back({Tok::End, "", {lineno, int(raw.size()) + 1}});
      lines.push_back(std::move(line));
    }
    if (eol == text.size()) break;
  }
  return lines;
}

/// Cursor over the tokens of one line.
class LineParser {
 public:
  explicit LineParser(const Line& line) : toks_(line.tokens) {}

  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(i_ + ahead, toks_.size() - 1)];
  }
  const Token& next() {
    const Token& t = toks_[i_];
    if (i_ + 1 < toks_.size()) ++i_;
    return t;
  }
  bool at_end() const { return peek().kind == Tok::End; }
  bool is_op(const char* s) const { return peek().kind == Tok::Op && peek().text == s; }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }

  void expect_op(const char* s) {
    if (!is_op(s)) syntax(std::string("expected '") + s + "'" + found(), peek().loc);
    next();
  }
  void expect_ident(const char* s) {
    if (!is_ident(s)) syntax(std::string("expected '") + s + "'" + found(), peek().loc);
    next();
  }
  std::string ident() {
    if (peek().kind != Tok::Ident) syntax("expected identifier" + found(), peek().loc);
    return next().text;
  }
  void expect_end() {
    if (!at_end()) syntax("unexpected '" + peek().text + "'", peek().loc);
  }
  std::string found() const {
    return peek().kind == Tok::End ? " at end of line" : ", found '" + peek().text + "'";
  }

  long integer() {
    bool neg = false;
    if (is_op("-")) {
      next();
      neg = true;
    } else if (is_op("+")) {
      next();
    }
    const Token& t = peek();
    if (t.kind != Tok::Number || t.text.find_first_of(".eE") != std::string::npos)
      syntax("expected integer" + found(), t.loc);
    next();
    long v = std::stol(t.text);
    return neg ? -v : v;
  }

  double number() {
    bool neg = false;
    if (is_op("-")) {
      next();
      neg = true;
    }
    const Token& t = peek();
    if (t.kind != Tok::Number) syntax("expected number" + found(), t.loc);
    next();
    double v = std::stod(t.text);
    return neg ? -v : v;
  }

  // --- expressions -------------------------------------------------------

  Expr expression() {
    Expr a = or_expr();
    if (is_ident("if")) {
      SourceLoc loc = next().loc;
      Expr cond = or_expr();
      expect_ident("else");
      Expr b = expression();
      Expr e = Expr::select(std::move(cond), std::move(a), std::move(b));
      e.loc = loc;
      return e;
    }
    return a;
  }

 private:
  Expr or_expr() {
    Expr a = and_expr();
    while (is_ident("or")) {
      SourceLoc loc = next().loc;
      a = binary(BinaryOp::Or, std::move(a), and_expr(), loc);
    }
    return a;
  }
  Expr and_expr() {
    Expr a = not_expr();
    while (is_ident("and")) {
      SourceLoc loc = next().loc;
      a = binary(BinaryOp::And, std::move(a), not_expr(), loc);
    }
    return a;
  }
  Expr not_expr() {
    if (is_ident("not")) {
      SourceLoc loc = next().loc;
      Expr e = Expr::unary(UnaryOp::Not, not_expr());
      e.loc = loc;
      return e;
    }
    return comparison();
  }
  Expr comparison() {
    Expr a = arith();
    static const std::pair<const char*, BinaryOp> ops[] = {
        {"<", BinaryOp::Lt}, {"<=", BinaryOp::Le}, {">", BinaryOp::Gt},
        {">=", BinaryOp::Ge}, {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}};
    for (const auto& [tok, op] : ops) {
      if (is_op(tok)) {
        SourceLoc loc = next().loc;
        return binary(op, std::move(a), arith(), loc);
      }
    }
    return a;
  }
  Expr arith() {
    Expr a = term();
    while (is_op("+") || is_op("-")) {
      const Token& t = next();
      a = binary(t.text == "+" ? BinaryOp::Add : BinaryOp::Sub, std::move(a), term(), t.loc);
    }
    return a;
  }
  Expr term() {
    Expr a = factor();
    while (is_op("*") || is_op("/")) {
      const Token& t = next();
      a = binary(t.text == "*" ? BinaryOp::Mul : BinaryOp::Div, std::move(a), factor(), t.loc);
    }
    return a;
  }
  Expr factor() {
    if (is_op("-")) {
      SourceLoc loc = next().loc;
      Expr inner = factor();
      if (inner.kind == ExprKind::Literal && !std::signbit(inner.value)) {
        inner.value = -inner.value;
        inner.loc = loc;
        return inner;
      }
      Expr e = Expr::unary(UnaryOp::Neg, std::move(inner));
      e.loc = loc;
      return e;
    }
    if (is_op("+")) {
      next();
      return factor();
    }
    return power();
  }
  Expr power() {
    Expr a = atom();
    if (is_op("**")) {
      SourceLoc loc = next().loc;
      return binary(BinaryOp::Pow, std::move(a), factor(), loc);
    }
    return a;
  }
  Expr atom() {
    const Token& t = peek();
    if (t.kind == Tok::Number) {
      next();
      const bool integer = t.text.find_first_of(".eE") == std::string::npos;
      Expr e = Expr::literal(std::stod(t.text), integer);
      e.loc = t.loc;
      return e;
    }
    if (t.kind == Tok::Op && t.text == "(") {
      next();
      Expr e = expression();
      expect_op(")");
      return e;
    }
    if (t.kind == Tok::Ident) {
      const Token name = next();
      if (is_op("(")) {
        auto fn = builtin_from_name(name.text);
        if (!fn) throw Error("syntax error", "unknown builtin function '" + name.text + "'", name.loc);
        next();
        std::vector<Expr> args;
        if (!is_op(")")) {
          args.push_back(expression());
          while (is_op(",")) {
            next();
            args.push_back(expression());
          }
        }
        expect_op(")");
        const std::size_t want = (*fn == Builtin::Min || *fn == Builtin::Max) ? 2 : 1;
        if (args.size() != want)
          syntax(std::string(builtin_name(*fn)) + "() takes " + std::to_string(want) +
                     " argument(s)",
                 name.loc);
        Expr e = Expr::call(*fn, std::move(args));
        e.loc = name.loc;
        return e;
      }
      if (is_op("[")) {
        next();
        std::vector<Expr> parts;
        parts.push_back(expression());
        while (is_op(",")) {
          next();
          parts.push_back(expression());
        }
        expect_op("]");
        if (parts.size() == 1) {
          Expr e = Expr::index(name.text, std::move(parts[0]));
          e.loc = name.loc;
          return e;
        }
        if (parts.size() > 3) syntax("too many offset components", name.loc);
        int comps[3] = {0, 0, 0};
        for (std::size_t k = 0; k < parts.size(); ++k) {
          const Expr& p = parts[k];
          if (p.kind != ExprKind::Literal || !p.integer)
            throw Error("syntax error",
                        "field offsets must be integer constants (no data-dependent or absolute "
                        "indices)",
                        p.loc.line ? p.loc : name.loc);
          comps[k] = static_cast<int>(p.value);
        }
        Expr e = Expr::field(name.text, Offset{comps[0], comps[1], comps[2]});
        e.loc = name.loc;
        return e;
      }
      if (name.text == "None" || name.text == "if" || name.text == "else")
        syntax("unexpected '" + name.text + "'", name.loc);
      Expr e = Expr::make_name(name.text);
      e.loc = name.loc;
      return e;
    }
    syntax("expected expression" + found(), t.loc);
  }

  static Expr binary(BinaryOp op, Expr a, Expr b, SourceLoc loc) {
    Expr e = Expr::binary(op, std::move(a), std::move(b));
    e.loc = loc;
    return e;
  }

  const std::vector<Token>& toks_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Line> lines) : lines_(std::move(lines)) {}

  StencilProgram run() {
    while (pos_ < lines_.size()) {
      const Line& line = lines_[pos_];
      if (line.indent != 0) syntax("unexpected indentation", {line.number, line.indent + 1});
      LineParser lp(line);
      const Token& head = lp.peek();
      if (head.kind != Tok::Ident) syntax("expected declaration", head.loc);
      if (head.text == "field" || head.text == "temp") {
        parse_field(lp);
        ++pos_;
      } else if (head.text == "param") {
        parse_param(lp);
        ++pos_;
      } else if (head.text == "config") {
        parse_config(lp);
        ++pos_;
      } else if (head.text == "stencil") {
        parse_stencil(lp);
      } else if (head.text == "driver") {
        lp.next();
        lp.expect_op(":");
        lp.expect_end();
        const int indent = line.indent;
        ++pos_;
        auto body = parse_driver_block(indent);
        prog_.driver.insert(prog_.driver.end(), body.begin(), body.end());
      } else {
        syntax("unknown declaration '" + head.text + "'", head.loc);
      }
    }
    resolve_names();
    return std::move(prog_);
  }

 private:
  void parse_field(LineParser& lp) {
    FieldDecl f;
    const Token kw = lp.next();
    f.temporary = kw.text == "temp";
    f.loc = kw.loc;
    f.name = lp.ident();
    lp.expect_op(":");
    const Token ty = lp.peek();
    const std::string t = lp.ident();
    if (t == "float64")
      f.element = ElementType::Float64;
    else if (t == "float32")
      f.element = ElementType::Float32;
    else
      syntax("unknown element type '" + t + "'", ty.loc);
    lp.expect_op("[");
    std::vector<std::string> dims;
    dims.push_back(lp.ident());
    while (lp.is_op(",")) {
      lp.next();
      dims.push_back(lp.ident());
    }
    lp.expect_op("]");
    lp.expect_end();
    if (dims == std::vector<std::string>{"I", "J", "K"})
      f.has_k = true;
    else if (dims == std::vector<std::string>{"I", "J"})
      f.has_k = false;
    else
      syntax("field dimensions must be [I, J, K] or [I, J]", ty.loc);
    prog_.fields.push_back(std::move(f));
  }

  void parse_param(LineParser& lp) {
    ParamDecl p;
    p.loc = lp.next().loc;
    p.name = lp.ident();
    lp.expect_op("=");
    if (lp.is_op("[")) {
      lp.next();
      p.is_array = true;
      p.values.push_back(lp.number());
      while (lp.is_op(",")) {
        lp.next();
        p.values.push_back(lp.number());
      }
      lp.expect_op("]");
    } else {
      p.values.push_back(lp.number());
    }
    lp.expect_end();
    prog_.params.push_back(std::move(p));
  }

  void parse_config(LineParser& lp) {
    ConfigDecl c;
    c.loc = lp.next().loc;
    c.name = lp.ident();
    lp.expect_op("=");
    const bool neg = lp.is_op("-");
    const Token num = neg ? lp.peek(1) : lp.peek();
    c.integer = num.kind == Tok::Number && num.text.find_first_of(".eE") == std::string::npos;
    c.value = lp.number();
    lp.expect_end();
    prog_.configs.push_back(std::move(c));
  }

  const Line* child(int parent_indent, int* indent) {
    if (pos_ >= lines_.size()) return nullptr;
    const Line& l = lines_[pos_];
    if (l.indent <= parent_indent) return nullptr;
    if (*indent < 0) *indent = l.indent;
    if (l.indent != *indent) syntax("inconsistent indentation", {l.number, l.indent + 1});
    return &l;
  }

  void parse_stencil(LineParser& lp) {
    StencilDef s;
    s.loc = lp.next().loc;
    s.name = lp.ident();
    lp.expect_op(":");
    lp.expect_end();
    const int parent = lines_[pos_].indent;
    const int header_line = lines_[pos_].number;
    ++pos_;
    int indent = -1;
    int computation = 0;
    while (const Line* l = child(parent, &indent)) {
      LineParser wp(*l);
      parse_with(wp, indent, s.blocks, std::nullopt, computation++);
    }
    if (s.blocks.empty()) throw Error("syntax error", "empty computation", {header_line, 1});
    prog_.stencils.push_back(std::move(s));
  }

  Policy parse_policy(LineParser& lp) {
    lp.expect_ident("computation");
    lp.expect_op("(");
    const Token t = lp.peek();
    const std::string p = lp.ident();
    lp.expect_op(")");
    if (p == "PARALLEL") return Policy::Parallel;
    if (p == "FORWARD") return Policy::Forward;
    if (p == "BACKWARD") return Policy::Backward;
    syntax("unknown iteration policy '" + p + "'", t.loc);
  }

  Level parse_level(LineParser& lp, bool is_end) {
    if (lp.is_ident("None")) {
      lp.next();
      return is_end ? Level{Level::Anchor::End, 0} : Level{Level::Anchor::Start, 0};
    }
    const long v = lp.integer();
    if (v < 0) return Level{Level::Anchor::End, int(v)};
    return Level{Level::Anchor::Start, int(v)};
  }

  Interval parse_interval(LineParser& lp) {
    lp.expect_ident("interval");
    lp.expect_op("(");
    Interval iv;
    if (lp.is_op("...")) {
      lp.next();
    } else {
      iv.start = parse_level(lp, false);
      lp.expect_op(",");
      iv.end = parse_level(lp, true);
    }
    lp.expect_op(")");
    return iv;
  }

  std::optional<AxisBound> parse_axis_bound(LineParser& lp, char axis) {
    if (lp.is_op(":") || lp.is_op(",") || lp.is_op("]")) return std::nullopt;
    const Token t = lp.peek();
    const std::string a = lp.ident();
    AxisBound b;
    const std::string start = std::string(1, axis) + "_start";
    const std::string end = std::string(1, axis) + "_end";
    if (a == start)
      b.anchor = AxisBound::Anchor::Start;
    else if (a == end)
      b.anchor = AxisBound::Anchor::End;
    else
      throw Error("syntax error",
                  "region bounds must be relative to " + start + " or " + end +
                      " (absolute indices are not supported)",
                  t.loc);
    if (lp.is_op("+") || lp.is_op("-")) {
      const bool neg = lp.next().text == "-";
      const long v = lp.integer();
      b.offset = int(neg ? -v : v);
    }
    return b;
  }

  AxisConstraint parse_axis(LineParser& lp, char axis) {
    AxisConstraint c;
    if (lp.is_op(":") && (lp.peek(1).text == "," || lp.peek(1).text == "]")) {
      lp.next();
      return c;
    }
    c.full = false;
    auto lo = parse_axis_bound(lp, axis);
    if (lp.is_op(":")) {
      lp.next();
      c.lo = lo;
      c.hi = parse_axis_bound(lp, axis);
      return c;
    }
    if (!lo) syntax("expected region bound" + lp.found(), lp.peek().loc);
    c.point = true;
    c.lo = lo;
    c.hi = AxisBound{lo->anchor, lo->offset + 1};
    return c;
  }

  HorizontalRegion parse_region(LineParser& lp) {
    lp.expect_ident("horizontal");
    lp.expect_op("(");
    lp.expect_ident("region");
    lp.expect_op("[");
    HorizontalRegion r;
    r.i = parse_axis(lp, 'i');
    lp.expect_op(",");
    r.j = parse_axis(lp, 'j');
    lp.expect_op("]");
    lp.expect_op(")");
    return r;
  }

  /// Parses a `with ...:` header at lines_[pos_] and its body.
  void parse_with(LineParser& lp, int indent, std::vector<ComputationBlock>& blocks,
                  std::optional<Policy> outer_policy, int computation) {
    const Line& line = lines_[pos_];
    const SourceLoc loc = lp.peek().loc;
    lp.expect_ident("with");
    if (lp.is_ident("interval")) {
      if (!outer_policy) syntax("interval without enclosing computation", loc);
      ComputationBlock b;
      b.policy = *outer_policy;
      b.computation = computation;
      b.loc = loc;
      b.interval = parse_interval(lp);
      lp.expect_op(":");
      lp.expect_end();
      ++pos_;
      parse_statements(indent, b.statements, std::nullopt, line.number);
      blocks.push_back(std::move(b));
      return;
    }
    if (outer_policy) syntax("nested computation", loc);
    const Policy policy = parse_policy(lp);
    if (lp.is_op(",")) {
      lp.next();
      ComputationBlock b;
      b.policy = policy;
      b.computation = computation;
      b.loc = loc;
      b.interval = parse_interval(lp);
      lp.expect_op(":");
      lp.expect_end();
      ++pos_;
      parse_statements(indent, b.statements, std::nullopt, line.number);
      blocks.push_back(std::move(b));
      return;
    }
    lp.expect_op(":");
    lp.expect_end();
    ++pos_;
    int child_indent = -1;
    bool any = false;
    while (const Line* l = child(indent, &child_indent)) {
      LineParser wp(*l);
      if (!wp.is_ident("with")) syntax("expected 'with interval(...)'", wp.peek().loc);
      parse_with(wp, child_indent, blocks, policy, computation);
      any = true;
    }
    if (!any) throw Error("syntax error", "empty computation", loc);
  }

  void parse_statements(int parent, std::vector<Statement>& out,
                        std::optional<HorizontalRegion> region, int header_line) {
    int indent = -1;
    const std::size_t before = out.size();
    while (const Line* l = child(parent, &indent)) {
      LineParser lp(*l);
      if (lp.is_ident("with")) {
        const SourceLoc loc = lp.next().loc;
        if (region) syntax("nested horizontal regions are not supported", loc);
        HorizontalRegion r = parse_region(lp);
        lp.expect_op(":");
        lp.expect_end();
        const int hl = l->number;
        ++pos_;
        parse_statements(indent, out, r, hl);
        continue;
      }
      Statement s;
      s.loc = lp.peek().loc;
      s.target = lp.ident();
      if (lp.is_op("[")) syntax("assignments must target the current point (no offset)", lp.peek().loc);
      lp.expect_op("=");
      s.value = lp.expression();
      lp.expect_end();
      s.region = region;
      out.push_back(std::move(s));
      ++pos_;
    }
    if (out.size() == before) throw Error("syntax error", "empty computation", {header_line, 1});
  }

  std::vector<DriverStmt> parse_driver_block(int parent) {
    std::vector<DriverStmt> out;
    int indent = -1;
    while (const Line* l = child(parent, &indent)) {
      LineParser lp(*l);
      DriverStmt d;
      d.loc = lp.peek().loc;
      if (lp.is_ident("for")) {
        lp.next();
        d.kind = DriverStmt::Kind::For;
        d.name = lp.ident();
        lp.expect_ident("in");
        lp.expect_ident("range");
        lp.expect_op("(");
        d.value = lp.expression();
        lp.expect_op(")");
        if (lp.is_ident("unroll")) {
          lp.next();
          d.unroll = true;
        }
        lp.expect_op(":");
        lp.expect_end();
        ++pos_;
        d.body = parse_driver_block(indent);
        if (d.body.empty()) syntax("empty loop body", d.loc);
      } else if (lp.is_ident("if")) {
        lp.next();
        d.kind = DriverStmt::Kind::If;
        d.value = lp.expression();
        lp.expect_op(":");
        lp.expect_end();
        ++pos_;
        d.body = parse_driver_block(indent);
        if (d.body.empty()) syntax("empty branch body", d.loc);
        if (pos_ < lines_.size() && lines_[pos_].indent == indent) {
          LineParser ep(lines_[pos_]);
          if (ep.is_ident("else")) {
            ep.next();
            ep.expect_op(":");
            ep.expect_end();
            ++pos_;
            d.orelse = parse_driver_block(indent);
            if (d.orelse.empty()) syntax("empty branch body", d.loc);
          }
        }
      } else {
        d.name = lp.ident();
        if (lp.is_op("=")) {
          lp.next();
          d.kind = DriverStmt::Kind::Assign;
          d.value = lp.expression();
        } else {
          d.kind = DriverStmt::Kind::Call;
          lp.expect_op("(");
          if (!lp.is_op(")")) {
            do {
              if (lp.is_op(",")) lp.next();
              std::string pname = lp.ident();
              lp.expect_op("=");
              d.args.emplace_back(std::move(pname), lp.expression());
            } while (lp.is_op(","));
          }
          lp.expect_op(")");
        }
        lp.expect_end();
        ++pos_;
      }
      out.push_back(std::move(d));
    }
    return out;
  }

  /// Bare identifiers naming a declared field become zero-offset field reads.
  void resolve_names() {
    for (auto& s : prog_.stencils)
      for (auto& b : s.blocks)
        for (auto& st : b.statements)
          visit_mut(st.value, [&](Expr& e) {
            if (e.kind == ExprKind::Name && prog_.find_field(e.name)) {
              e.kind = ExprKind::FieldRef;
              e.offset = {};
            }
          });
  }

  std::vector<Line> lines_;
  std::size_t pos_ = 0;
  StencilProgram prog_;
};

}  // namespace

StencilProgram parse_program(std::string_view text) { return Parser(tokenize(text)).run(); }

StencilProgram parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io error", "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

}  // namespace sf
