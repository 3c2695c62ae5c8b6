#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sf/common.hpp"
#include "sf/frontend/expr.hpp"

namespace sf {

enum class ElementType { Float64, Float32 };

inline int element_size(ElementType t) { return t == ElementType::Float64 ? 8 : 4; }
inline const char* element_name(ElementType t) {
  return t == ElementType::Float64 ? "float64" : "float32";
}

struct FieldDecl {
  std::string name;
  bool has_k = true;  // false for IJ (2D horizontal) fields
  ElementType element = ElementType::Float64;
  bool temporary = false;
  SourceLoc loc;

  bool has_dim(Dim d) const { return d != Dim::K || has_k; }
};

/// Symbolic vertical bound: K_start + offset or K_end + offset, where K_end is
/// one past the last level.
struct Level {
  enum class Anchor { Start, End } anchor = Anchor::Start;
  int offset = 0;

  int resolve(int nk) const { return anchor == Anchor::Start ? offset : nk + offset; }
  friend bool operator==(const Level&, const Level&) = default;
};

struct Interval {
  Level start;
  Level end{Level::Anchor::End, 0};

  Range resolve(int nk) const { return {start.resolve(nk), end.resolve(nk)}; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// One horizontal axis of a region: unconstrained, or a half-open index range
/// anchored at the domain edges. A point constraint `i_start + c` is stored
/// as the range [i_start + c, i_start + c + 1).
struct AxisBound {
  enum class Anchor { Start, End } anchor = Anchor::Start;
  int offset = 0;
  friend bool operator==(const AxisBound&, const AxisBound&) = default;
};

struct AxisConstraint {
  bool full = true;
  bool point = false;               // written as a single index
  std::optional<AxisBound> lo;      // inclusive; nullopt = unbounded
  std::optional<AxisBound> hi;      // exclusive; nullopt = unbounded
  friend bool operator==(const AxisConstraint&, const AxisConstraint&) = default;
};

struct HorizontalRegion {
  AxisConstraint i;
  AxisConstraint j;
  friend bool operator==(const HorizontalRegion&, const HorizontalRegion&) = default;
};

enum class Policy { Parallel, Forward, Backward };

const char* policy_name(Policy p);

struct Statement {
  std::string target;
  Expr value;
  std::optional<HorizontalRegion> region;
  SourceLoc loc;
};

struct ComputationBlock {
  Policy policy = Policy::Parallel;
  Interval interval;
  std::vector<Statement> statements;
  int computation = 0;  // index of the enclosing `with computation` within its stencil
  SourceLoc loc;
};

struct StencilDef {
  std::string name;
  std::vector<ComputationBlock> blocks;
  SourceLoc loc;
};

/// Runtime scalar parameter (or parameter array). Values are not folded at
/// compile time.
struct ParamDecl {
  std::string name;
  std::vector<double> values;
  bool is_array = false;
  SourceLoc loc;
};

/// Compile-time configuration constant.
struct ConfigDecl {
  std::string name;
  double value = 0.0;
  bool integer = true;
  SourceLoc loc;
};

struct DriverStmt {
  enum class Kind { Call, Assign, For, If } kind = Kind::Call;
  std::string name;                                 // callee / assigned var / loop var
  std::vector<std::pair<std::string, Expr>> args;   // Call: parameter bindings
  Expr value;                                       // Assign: rhs; For: trip count; If: cond
  bool unroll = false;                              // For
  std::vector<DriverStmt> body;                     // For / If-then
  std::vector<DriverStmt> orelse;                   // If-else
  SourceLoc loc;
};

struct StencilProgram {
  std::vector<FieldDecl> fields;
  std::vector<ParamDecl> params;
  std::vector<ConfigDecl> configs;
  std::vector<StencilDef> stencils;
  std::vector<DriverStmt> driver;

  const FieldDecl* find_field(const std::string& n) const;
  const ParamDecl* find_param(const std::string& n) const;
  const ConfigDecl* find_config(const std::string& n) const;
  const StencilDef* find_stencil(const std::string& n) const;
};

/// One resolved stencil invocation in the straight-line driver trace.
struct StencilCall {
  std::string stencil;
  std::map<std::string, double> params;  // bound scalar parameter values
};

/// Resolves the driver to its straight-line call sequence. Throws Error when
/// control flow depends on non-constant values.
std::vector<StencilCall> resolve_driver(const StencilProgram& program);

/// Default values of scalar parameters (arrays excluded).
std::map<std::string, double> default_params(const StencilProgram& program);

}  // namespace sf
