#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sf/frontend/ast.hpp"

namespace sf {

/// Halo reach of a field per dimension (I, J, K): lo <= 0 <= hi. Compute
/// extents of temporaries are exact and may leave out the origin.
struct Extent {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  void merge(const Extent& o);
  bool zero() const;
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Extent of `box` relative to the interior of `domain` (clamped to contain 0).
Extent extent_of(const Box& box, const Domain& domain);

/// Resolves one horizontal region axis against a domain. `base` is used for
/// unconstrained ends; bounds anchored at an edge this subdomain does not own
/// collapse onto `base` so that points there resolve empty.
Range resolve_axis(const AxisConstraint& c, Range base, int n, bool owns_start, bool owns_end);

/// Iteration box of a statement: interior plus its horizontal compute extent,
/// restricted by its region, over the resolved block interval.
Box statement_box(const Statement& st, const Interval& iv, const Extent& compute, const Domain& d);

/// Field subset accessed by a statement at `offset` when iterating over `box`.
Box access_box(const Box& box, const Offset& offset, bool has_k);

/// Resolved geometry of a program on a concrete domain.
struct Geometry {
  std::map<std::string, Extent> fields;
  // stencil -> block -> statement compute extents (horizontal; hull over calls)
  std::map<std::string, std::vector<std::vector<Extent>>> compute;

  Box box(const StencilProgram& p, const std::string& stencil, int block, int stmt,
          const Domain& d) const;
};

/// Backward pass over the resolved statement trace. Temporaries are computed
/// wherever a later statement reads them; other fields only on the interior
/// (plus explicit region cells).
Geometry analyze_geometry(const StencilProgram& program, const Domain& domain);

/// Field halo extents on `domain`.
std::map<std::string, Extent> infer_extents(const StencilProgram& program, const Domain& domain);

}  // namespace sf
