#include "sf/exec/field.hpp"

#include <cstdlib>
#include <cstring>

namespace sf {

void FieldBuffer::Free::operator()(void* p) const { std::free(p); }

FieldBuffer::FieldBuffer(std::string name, ElementType element, Layout layout, bool transient)
    : name_(std::move(name)), element_(element), layout_(layout), transient_(transient) {
  const std::size_t esize = std::size_t(element_size(element));
  const std::size_t align = std::max<std::size_t>(64, std::size_t(layout.alignment) * esize);
  std::size_t bytes = std::size_t(std::max<std::int64_t>(layout.size, 1)) * esize;
  bytes = (bytes + align - 1) / align * align;
  void* p = std::aligned_alloc(align, bytes);
  if (!p) throw Error("memory", "cannot allocate field '" + name_ + "'");
  std::memset(p, 0, bytes);
  data_.reset(p);
}

double FieldBuffer::get(std::int64_t i, std::int64_t j, std::int64_t k) const {
  const auto idx = layout_.index(i, j, k);
  return element_ == ElementType::Float64 ? f64()[idx] : double(f32()[idx]);
}

void FieldBuffer::set(std::int64_t i, std::int64_t j, std::int64_t k, double v) {
  const auto idx = layout_.index(i, j, k);
  if (element_ == ElementType::Float64)
    f64()[idx] = v;
  else
    f32()[idx] = float(v);
}

void FieldBuffer::fill(double v) {
  for (std::int64_t n = 0; n < layout_.size; ++n) {
    if (element_ == ElementType::Float64)
      f64()[n] = v;
    else
      f32()[n] = float(v);
  }
}

FieldSet allocate_fields(const DataflowGraph& graph, std::int64_t alignment) {
  FieldSet out;
  for (const auto& c : graph.arrays)
    out.emplace(c.name, FieldBuffer(c.name, c.element, allocate_layout(c.has_k, c.halo, graph.domain, alignment),
                                    c.transient));
  return out;
}

namespace {

std::uint64_t mix(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ULL;
  return h;
}

}  // namespace

double input_value(std::uint64_t seed, const std::string& field, std::int64_t i, std::int64_t j,
                   std::int64_t k) {
  std::uint64_t h = mix(seed ^ name_hash(field));
  h = mix(h ^ std::uint64_t(i + (1 << 20)));
  h = mix(h ^ (std::uint64_t(j + (1 << 20)) << 21));
  h = mix(h ^ (std::uint64_t(k + (1 << 20)) << 42));
  const double u = double(h >> 11) * (1.0 / 9007199254740992.0);
  return 0.1 + 9.9 * u;
}

void fill_inputs(FieldSet& fields, const DataflowGraph& graph, std::uint64_t seed) {
  for (const auto& c : graph.arrays) {
    auto& f = fields.at(c.name);
    f.fill(0.0);
    if (c.transient) continue;
    const Box b = c.shape_box(graph.domain);
    for (auto k = b.r[2].lo; k < b.r[2].hi; ++k)
      for (auto j = b.r[1].lo; j < b.r[1].hi; ++j)
        for (auto i = b.r[0].lo; i < b.r[0].hi; ++i) f.set(i, j, k, input_value(seed, c.name, i, j, k));
  }
}

FieldSet clone_fields(const FieldSet& from) {
  FieldSet out;
  for (const auto& [name, src] : from) {
    FieldBuffer b(name, src.element(), src.layout(), src.transient());
    std::memcpy(b.raw(), src.raw(), src.bytes());
    out.emplace(name, std::move(b));
  }
  return out;
}

void restore_fields(const FieldSet& from, FieldSet& to) {
  for (const auto& [name, src] : from) {
    auto it = to.find(name);
    if (it == to.end() || it->second.bytes() != src.bytes())
      throw InternalError("restore_fields: layout mismatch for '" + name + "'");
    std::memcpy(it->second.raw(), src.raw(), src.bytes());
  }
}

void copy_fields(const FieldSet& from, FieldSet& to, const DataflowGraph& graph) {
  for (const auto& c : graph.arrays) {
    auto src = from.find(c.name);
    auto dst = to.find(c.name);
    if (src == from.end() || dst == to.end()) continue;
    const Box b = c.shape_box(graph.domain);
    for (auto k = b.r[2].lo; k < b.r[2].hi; ++k)
      for (auto j = b.r[1].lo; j < b.r[1].hi; ++j)
        for (auto i = b.r[0].lo; i < b.r[0].hi; ++i) dst->second.set(i, j, k, src->second.get(i, j, k));
  }
}

}  // namespace sf
