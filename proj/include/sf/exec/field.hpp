#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "sf/ir/graph.hpp"
#include "sf/sched/layout.hpp"

namespace sf {

/// Field storage following a Layout. The raw allocation is aligned to the
/// layout alignment (in bytes: alignment * element size, at least 64).
class FieldBuffer {
 public:
  FieldBuffer() = default;
  FieldBuffer(std::string name, ElementType element, Layout layout, bool transient);

  const std::string& name() const { return name_; }
  ElementType element() const { return element_; }
  const Layout& layout() const { return layout_; }
  bool transient() const { return transient_; }

  double* f64() { return static_cast<double*>(data_.get()); }
  const double* f64() const { return static_cast<const double*>(data_.get()); }
  float* f32() { return static_cast<float*>(data_.get()); }
  const float* f32() const { return static_cast<const float*>(data_.get()); }
  const void* raw() const { return data_.get(); }
  void* raw() { return data_.get(); }
  std::size_t bytes() const { return std::size_t(layout_.size) * std::size_t(element_size(element_)); }

  double get(std::int64_t i, std::int64_t j, std::int64_t k) const;
  void set(std::int64_t i, std::int64_t j, std::int64_t k, double v);
  void fill(double v);

 private:
  struct Free {
    void operator()(void* p) const;
  };
  std::string name_;
  ElementType element_ = ElementType::Float64;
  Layout layout_;
  bool transient_ = false;
  std::unique_ptr<void, Free> data_;
};

using FieldSet = std::map<std::string, FieldBuffer>;

/// Allocates one buffer per container with the given alignment (elements).
FieldSet allocate_fields(const DataflowGraph& graph, std::int64_t alignment = 8);

/// Deterministic input value for a cell, uniform in [0.1, 10].
double input_value(std::uint64_t seed, const std::string& field, std::int64_t i, std::int64_t j,
                   std::int64_t k);

/// Fills non-transient fields (halo included) from input_value; transients
/// and padding are zero.
void fill_inputs(FieldSet& fields, const DataflowGraph& graph, std::uint64_t seed);

/// Deep copy.
FieldSet clone_fields(const FieldSet& from);

/// Raw copy of every buffer of `from` into the same-layout buffer of `to`.
void restore_fields(const FieldSet& from, FieldSet& to);

/// Copies all cells of matching fields within the container shapes.
void copy_fields(const FieldSet& from, FieldSet& to, const DataflowGraph& graph);

}  // namespace sf
