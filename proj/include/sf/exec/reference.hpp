#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sf/exec/field.hpp"
#include "sf/frontend/ast.hpp"
#include "sf/ir/graph.hpp"

namespace sf {

/// One stencil invocation as seen by the reference interpreter.
struct RefCall {
  std::string name;
  std::vector<ComputationBlock> blocks;
  std::vector<std::vector<Box>> boxes;  // per block, per statement
  std::map<std::string, double> params;
};

struct RefProgram {
  Domain domain;
  std::vector<Container> arrays;
  std::vector<RefCall> calls;
};

/// Builds the reference call list straight from the program and its geometry.
RefProgram reference_program(const StencilProgram& program, const Domain& domain);
/// Builds it from the unrolled trace of a graph (one call per node instance).
RefProgram reference_program(const DataflowGraph& graph);

/// Dense row-major array over a container shape (halo included).
struct DenseField {
  Box shape;
  bool has_k = true;
  ElementType element = ElementType::Float64;
  bool transient = false;
  std::vector<double> data;

  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const;
  double at(std::int64_t i, std::int64_t j, std::int64_t k) const { return data[std::size_t(index(i, j, k))]; }
  double& at(std::int64_t i, std::int64_t j, std::int64_t k) { return data[std::size_t(index(i, j, k))]; }
};

using DenseSet = std::map<std::string, DenseField>;

/// Dense fields initialized exactly like fill_inputs.
DenseSet reference_inputs(const RefProgram& program, std::uint64_t seed);

/// Called for every element access: (call, block, field, dense index, write).
using RefObserver = std::function<void(int, int, const std::string&, std::int64_t, bool)>;

struct RefStats {
  std::int64_t nonfinite = 0;  // NaN/Inf values produced
};

/// Executes all calls in order; each statement is applied over its whole box
/// at a level before the next statement.
RefStats run_reference(const RefProgram& program, DenseSet& fields, const RefObserver* observer = nullptr);

struct Comparison {
  bool bitwise = true;
  double max_rel = 0.0;
  std::string worst;  // field of the largest difference
};

/// Compares non-transient fields over their full shapes.
Comparison compare(const DenseSet& expected, const FieldSet& actual, const DataflowGraph& graph);
Comparison compare(const FieldSet& expected, const FieldSet& actual, const DataflowGraph& graph);

}  // namespace sf
