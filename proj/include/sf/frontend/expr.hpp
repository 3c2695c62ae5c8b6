#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sf/common.hpp"

namespace sf {

/// Relative grid offset of a field access.
struct Offset {
  int di = 0;
  int dj = 0;
  int dk = 0;

  bool zero() const { return di == 0 && dj == 0 && dk == 0; }
  bool horizontal_zero() const { return di == 0 && dj == 0; }
  int operator[](int d) const { return d == 0 ? di : d == 1 ? dj : dk; }
  friend bool operator==(const Offset&, const Offset&) = default;
  friend auto operator<=>(const Offset&, const Offset&) = default;
};

enum class ExprKind { Literal, Name, FieldRef, Index, Unary, Binary, Call, Select };

enum class UnaryOp { Neg, Not };

enum class BinaryOp { Add, Sub, Mul, Div, Pow, Lt, Le, Gt, Ge, Eq, Ne, And, Or };

enum class Builtin { Sqrt, Min, Max, Abs };

const char* binary_op_token(BinaryOp op);
std::optional<Builtin> builtin_from_name(const std::string& name);
const char* builtin_name(Builtin b);

/// Expression tree shared by stencil bodies and the driver program.
///
/// Stencil expressions use FieldRef, Name (scalar parameters), literals and
/// arithmetic. Driver expressions use Name (config constants, parameters,
/// driver variables), Index into parameter arrays, comparisons and logic.
struct Expr {
  ExprKind kind = ExprKind::Literal;
  double value = 0.0;     // Literal
  bool integer = false;   // Literal written without a fraction
  std::string name;       // Name, FieldRef, Index
  Offset offset;          // FieldRef
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  Builtin fn = Builtin::Sqrt;
  std::vector<Expr> args;  // operands
  SourceLoc loc;

  static Expr literal(double v, bool integer = false);
  static Expr make_name(std::string n);
  static Expr field(std::string n, Offset o = {});
  static Expr index(std::string n, Expr idx);
  static Expr unary(UnaryOp op, Expr a);
  static Expr binary(BinaryOp op, Expr a, Expr b);
  static Expr call(Builtin f, std::vector<Expr> a);
  static Expr select(Expr cond, Expr a, Expr b);

  bool is_literal() const { return kind == ExprKind::Literal; }

  /// Structural equality, ignoring source locations.
  bool same(const Expr& o) const;

  /// Number of nodes in the tree.
  std::size_t size() const;
};

/// Applies a binary operator to scalar operands. Comparison and logical
/// operators produce 1.0 / 0.0. This is the single definition of scalar
/// semantics shared by every engine.
double apply_binary(BinaryOp op, double a, double b);
double apply_unary(UnaryOp op, double a);
double apply_builtin(Builtin f, double a, double b);

/// Recursively visits every node (pre-order).
void visit(const Expr& e, const std::function<void(const Expr&)>& fn);
void visit_mut(Expr& e, const std::function<void(Expr&)>& fn);

/// Collects (field, offset) pairs read by the expression, in evaluation order.
std::vector<std::pair<std::string, Offset>> field_reads(const Expr& e);

/// Lookup for names during evaluation / folding. Returns nullopt when the
/// name has no known value.
using NameLookup = std::function<std::optional<double>(const std::string&)>;
using IndexLookup = std::function<std::optional<double>(const std::string&, long)>;

/// Evaluates a driver expression fully; throws Error when a name is unknown.
double eval_scalar(const Expr& e, const NameLookup& names, const IndexLookup& index);

/// Substitutes known names and folds constant subtrees. Index expressions are
/// folded in their subscript only (the array itself is a runtime value).
Expr fold(const Expr& e, const NameLookup& names);

/// Canonical text of an expression (fully parenthesised where needed).
std::string to_string(const Expr& e);

/// Shortest round-trippable decimal text for a double.
std::string format_number(double v, bool integer);

}  // namespace sf
