#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sf/exec/field.hpp"
#include "sf/ir/expand.hpp"

namespace sf {

/// Operand of a row operation: a register row or a scalar slot.
struct Operand {
  bool scalar = false;
  int index = 0;
};

/// Row instruction of the statement VM. Every instruction works on a
/// contiguous register range [s, e) that maps to a row of grid points.
struct RowOp {
  enum class Code : std::uint8_t {
    Load,         // dst <- field at offset
    LoadPlane,    // dst <- shared scratch plane at offset
    LoadCarried,  // dst <- carried register if it holds the cell, else memory
    Fill,         // dst <- scalar a
    Unary,
    Binary,
    Call,
    Select,
  } code = Code::Fill;
  int dst = 0;
  Operand a, b, c;
  int field = 0;  // field slot for loads
  Offset offset;
  UnaryOp uop = UnaryOp::Neg;
  BinaryOp bop = BinaryOp::Add;
  Builtin fn = Builtin::Sqrt;
};

struct FieldSlot {
  std::string name;
  bool has_k = true;
  ElementType element = ElementType::Float64;
  CacheKind cache = CacheKind::None;
  bool forwarded = false;
  bool carried = false;
  int reg = -1;    // register row for local and forwarded values
  int plane = -1;  // shared plane index
  int carry = -1;  // carried register index
};

struct CompiledStmt {
  Box box;
  int target = 0;  // field slot
  std::vector<RowOp> ops;
  Operand result;
};

struct CompiledSection {
  int block = 0;
  int dir = 1;
  std::vector<CompiledStmt> stmts;
};

struct PlaneShape {
  Range i, j;
};

/// A node ready for execution: its expansion plus row programs per section.
struct CompiledNode {
  std::string name;
  KernelPlan plan;
  std::vector<FieldSlot> fields;
  std::vector<CompiledSection> sections;
  std::vector<double> scalars;                      // literal values; params appended per call
  std::vector<std::pair<int, std::string>> params;  // scalar slot <- parameter name
  std::vector<PlaneShape> planes;
  int registers = 0;
  int carried = 0;
  std::int64_t row_max = 1;
};

CompiledNode compile_node(const StencilNode& node, const DataflowGraph& graph);

/// Per-worker scratch for the VM.
struct WorkerScratch {
  std::vector<double> regs;
  std::vector<double> carry_value;
  std::vector<std::array<std::int64_t, 3>> carry_cell;
  std::vector<std::vector<double>> planes;
};

/// Resolved state for one invocation of a compiled node.
struct Invocation {
  const CompiledNode* node = nullptr;
  std::vector<FieldBuffer*> buffers;  // per field slot
  std::vector<double> scalars;
  bool use_carried = false;
};

/// Executes the statements of a section over a row [lo, hi) along `row`;
/// the other two coordinates come from `coord`.
void exec_row(const Invocation& inv, const CompiledSection& sec, WorkerScratch& ws,
              std::vector<std::vector<double>>& planes, const std::array<std::int64_t, 3>& coord,
              int row, std::int64_t lo, std::int64_t hi);

}  // namespace sf
