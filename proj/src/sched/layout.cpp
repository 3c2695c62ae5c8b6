#include "sf/sched/layout.hpp"

namespace sf {

Layout allocate_layout(bool has_k, const Extent& e, const Domain& d, std::int64_t a) {
  if (a < 1 || (a & (a - 1)) != 0) throw Error("layout", "alignment must be a power of two");
  Layout l;
  l.alignment = a;
  l.origin = {-e.lo[0], -e.lo[1], has_k ? -e.lo[2] : 0};
  l.shape = {d.ni + l.origin[0] + e.hi[0], d.nj + l.origin[1] + e.hi[1],
             has_k ? d.nk + l.origin[2] + e.hi[2] : 1};
  const std::int64_t row = (l.shape[0] + a - 1) / a * a;
  l.pre_pad = (a - l.origin[0] % a) % a;
  l.strides = {1, row, has_k ? row * l.shape[1] : 0};
  l.size = l.pre_pad + row * l.shape[1] * l.shape[2];
  return l;
}

Layout allocate_layout(const FieldDecl& f, const Extent& e, const Domain& d, std::int64_t a) {
  return allocate_layout(f.has_k, e, d, a);
}

}  // namespace sf
