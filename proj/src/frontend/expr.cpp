#include "sf/frontend/expr.hpp"

#include <charconv>
#include <cmath>

namespace sf {

const char* binary_op_token(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Pow: return "**";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

std::optional<Builtin> builtin_from_name(const std::string& name) {
  if (name == "sqrt") return Builtin::Sqrt;
  if (name == "min") return Builtin::Min;
  if (name == "max") return Builtin::Max;
  if (name == "abs") return Builtin::Abs;
  return std::nullopt;
}

const char* builtin_name(Builtin b) {
  switch (b) {
    case Builtin::Sqrt: return "sqrt";
    case Builtin::Min: return "min";
    case Builtin::Max: return "max";
    case Builtin::Abs: return "abs";
  }
  return "?";
}

Expr Expr::literal(double v, bool integer) {
  Expr e;
  e.kind = ExprKind::Literal;
  e.value = v;
  e.integer = integer;
  return e;
}

Expr Expr::make_name(std::string n) {
  Expr e;
  e.kind = ExprKind::Name;
  e.name = std::move(n);
  return e;
}

Expr Expr::field(std::string n, Offset o) {
  Expr e;
  e.kind = ExprKind::FieldRef;
  e.name = std::move(n);
  e.offset = o;
  return e;
}

Expr Expr::index(std::string n, Expr idx) {
  Expr e;
  e.kind = ExprKind::Index;
  e.name = std::move(n);
  e.args.push_back(std::move(idx));
  return e;
}

Expr Expr::unary(UnaryOp op, Expr a) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.uop = op;
  e.args.push_back(std::move(a));
  return e;
}

Expr Expr::binary(BinaryOp op, Expr a, Expr b) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.bop = op;
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

Expr Expr::call(Builtin f, std::vector<Expr> a) {
  Expr e;
  e.kind = ExprKind::Call;
  e.fn = f;
  e.args = std::move(a);
  return e;
}

Expr Expr::select(Expr cond, Expr a, Expr b) {
  Expr e;
  e.kind = ExprKind::Select;
  e.args.push_back(std::move(cond));
  e.args.push_back(std::move(a));
  e.args.push_back(std::move(b));
  return e;
}

bool Expr::same(const Expr& o) const {
  if (kind != o.kind || args.size() != o.args.size()) return false;
  switch (kind) {
    case ExprKind::Literal:
      if (value != o.value && !(std::isnan(value) && std::isnan(o.value))) return false;
      break;
    case ExprKind::Name:
    case ExprKind::Index:
      if (name != o.name) return false;
      break;
    case ExprKind::FieldRef:
      if (name != o.name || offset != o.offset) return false;
      break;
    case ExprKind::Unary:
      if (uop != o.uop) return false;
      break;
    case ExprKind::Binary:
      if (bop != o.bop) return false;
      break;
    case ExprKind::Call:
      if (fn != o.fn) return false;
      break;
    case ExprKind::Select:
      break;
  }
  for (std::size_t i = 0; i < args.size(); ++i)
    if (!args[i].same(o.args[i])) return false;
  return true;
}

std::size_t Expr::size() const {
  std::size_t n = 1;
  for (const auto& a : args) n += a.size();
  return n;
}

double apply_binary(BinaryOp op, double a, double b) {
  switch (op) {
    case BinaryOp::Add: return a + b;
    case BinaryOp::Sub: return a - b;
    case BinaryOp::Mul: return a * b;
    case BinaryOp::Div: return a / b;
    case BinaryOp::Pow: return std::pow(a, b);
    case BinaryOp::Lt: return a < b ? 1.0 : 0.0;
    case BinaryOp::Le: return a <= b ? 1.0 : 0.0;
    case BinaryOp::Gt: return a > b ? 1.0 : 0.0;
    case BinaryOp::Ge: return a >= b ? 1.0 : 0.0;
    case BinaryOp::Eq: return a == b ? 1.0 : 0.0;
    case BinaryOp::Ne: return a != b ? 1.0 : 0.0;
    case BinaryOp::And: return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
    case BinaryOp::Or: return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
  }
  return 0.0;
}

double apply_unary(UnaryOp op, double a) {
  return op == UnaryOp::Neg ? -a : (a == 0.0 ? 1.0 : 0.0);
}

double apply_builtin(Builtin f, double a, double b) {
  switch (f) {
    case Builtin::Sqrt: return std::sqrt(a);
    case Builtin::Min: return b < a ? b : a;
    case Builtin::Max: return a < b ? b : a;
    case Builtin::Abs: return std::fabs(a);
  }
  return 0.0;
}

void visit(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  for (const auto& a : e.args) visit(a, fn);
}

void visit_mut(Expr& e, const std::function<void(Expr&)>& fn) {
  fn(e);
  for (auto& a : e.args) visit_mut(a, fn);
}

std::vector<std::pair<std::string, Offset>> field_reads(const Expr& e) {
  std::vector<std::pair<std::string, Offset>> out;
  visit(e, [&](const Expr& x) {
    if (x.kind == ExprKind::FieldRef) out.emplace_back(x.name, x.offset);
  });
  return out;
}

double eval_scalar(const Expr& e, const NameLookup& names, const IndexLookup& index) {
  switch (e.kind) {
    case ExprKind::Literal:
      return e.value;
    case ExprKind::Name: {
      auto v = names(e.name);
      if (!v) throw Error("unresolvable control flow", "unknown name '" + e.name + "'", e.loc);
      return *v;
    }
    case ExprKind::Index: {
      const double i = eval_scalar(e.args[0], names, index);
      auto v = index ? index(e.name, static_cast<long>(i)) : std::nullopt;
      if (!v)
        throw Error("unresolvable control flow",
                    "cannot index '" + e.name + "' at " + format_number(i, true), e.loc);
      return *v;
    }
    case ExprKind::FieldRef:
      throw Error("invalid expression", "field access in scalar context", e.loc);
    case ExprKind::Unary:
      return apply_unary(e.uop, eval_scalar(e.args[0], names, index));
    case ExprKind::Binary:
      return apply_binary(e.bop, eval_scalar(e.args[0], names, index),
                          eval_scalar(e.args[1], names, index));
    case ExprKind::Call: {
      const double a = eval_scalar(e.args[0], names, index);
      const double b = e.args.size() > 1 ? eval_scalar(e.args[1], names, index) : 0.0;
      return apply_builtin(e.fn, a, b);
    }
    case ExprKind::Select:
      return eval_scalar(e.args[0], names, index) != 0.0 ? eval_scalar(e.args[1], names, index)
                                                         : eval_scalar(e.args[2], names, index);
  }
  return 0.0;
}

namespace {

bool all_literal(const Expr& e) {
  for (const auto& a : e.args)
    if (!a.is_literal()) return false;
  return true;
}

bool integral_result(const Expr& e) {
  for (const auto& a : e.args)
    if (!a.integer) return false;
  return true;
}

}  // namespace

Expr fold(const Expr& e, const NameLookup& names) {
  if (e.kind == ExprKind::Name) {
    if (auto v = names(e.name)) {
      Expr out = Expr::literal(*v, std::floor(*v) == *v && std::fabs(*v) < 1e15);
      out.loc = e.loc;
      return out;
    }
    return e;
  }
  Expr out = e;
  for (auto& a : out.args) a = fold(a, names);
  if (out.kind == ExprKind::Index || out.kind == ExprKind::FieldRef || out.args.empty() ||
      !all_literal(out))
    return out;

  double v = 0.0;
  bool integer = false;
  switch (out.kind) {
    case ExprKind::Unary:
      v = apply_unary(out.uop, out.args[0].value);
      integer = out.uop == UnaryOp::Not || out.args[0].integer;
      break;
    case ExprKind::Binary:
      v = apply_binary(out.bop, out.args[0].value, out.args[1].value);
      integer = out.bop == BinaryOp::Div || out.bop == BinaryOp::Pow ? false
                                                                     : integral_result(out);
      if (out.bop >= BinaryOp::Lt) integer = true;
      break;
    case ExprKind::Call:
      v = apply_builtin(out.fn, out.args[0].value, out.args.size() > 1 ? out.args[1].value : 0.0);
      integer = out.fn != Builtin::Sqrt && integral_result(out);
      break;
    case ExprKind::Select:
      return out.args[0].value != 0.0 ? out.args[1] : out.args[2];
    default:
      return out;
  }
  Expr lit = Expr::literal(v, integer);
  lit.loc = e.loc;
  return lit;
}

std::string format_number(double v, bool integer) {
  if (integer && std::floor(v) == v && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Select: return 0;
    case ExprKind::Binary:
      switch (e.bop) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Lt:
        case BinaryOp::Le:
        case BinaryOp::Gt:
        case BinaryOp::Ge:
        case BinaryOp::Eq:
        case BinaryOp::Ne: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 6;
        case BinaryOp::Pow: return 8;
      }
      return 9;
    case ExprKind::Unary: return e.uop == UnaryOp::Not ? 3 : 7;
    case ExprKind::Literal: return e.value < 0 || std::signbit(e.value) ? 7 : 9;
    default: return 9;
  }
}

std::string wrap(const Expr& child, bool paren) {
  return paren ? "(" + to_string(child) + ")" : to_string(child);
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Literal:
      return format_number(e.value, e.integer);
    case ExprKind::Name:
      return e.name;
    case ExprKind::FieldRef:
      if (e.offset.zero()) return e.name;
      return e.name + "[" + std::to_string(e.offset.di) + ", " + std::to_string(e.offset.dj) +
             ", " + std::to_string(e.offset.dk) + "]";
    case ExprKind::Index:
      return e.name + "[" + to_string(e.args[0]) + "]";
    case ExprKind::Unary: {
      const int p = precedence(e);
      const bool paren = precedence(e.args[0]) < p ||
                         (e.uop == UnaryOp::Neg && e.args[0].kind == ExprKind::Literal);
      return std::string(e.uop == UnaryOp::Neg ? "-" : "not ") + wrap(e.args[0], paren);
    }
    case ExprKind::Binary: {
      const int p = precedence(e);
      const bool right_assoc = e.bop == BinaryOp::Pow;
      const int pl = precedence(e.args[0]);
      const int pr = precedence(e.args[1]);
      const bool lp = right_assoc ? pl <= p : pl < p;
      // Comparisons are non-associative; always parenthesise nested ones.
      const bool rp = right_assoc ? pr < p - 1 : pr <= p;
      return wrap(e.args[0], lp) + " " + binary_op_token(e.bop) + " " + wrap(e.args[1], rp);
    }
    case ExprKind::Call: {
      std::string s = std::string(builtin_name(e.fn)) + "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) s += ", ";
        s += to_string(e.args[i]);
      }
      return s + ")";
    }
    case ExprKind::Select:
      return wrap(e.args[1], precedence(e.args[1]) <= 0) + " if " +
             wrap(e.args[0], precedence(e.args[0]) <= 0) + " else " + to_string(e.args[2]);
  }
  return "";
}

}  // namespace sf
