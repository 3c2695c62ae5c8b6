#pragma once

#include <array>
#include <cstdint>

#include "sf/frontend/ast.hpp"
#include "sf/frontend/extents.hpp"

namespace sf {

/// Padded, aligned storage layout. I is the unit-stride dimension; every row
/// is padded to a multiple of the alignment and the buffer starts with
/// `pre_pad` elements so the first interior element of each row is aligned.
struct Layout {
  std::array<std::int64_t, 3> shape{1, 1, 1};    // I, J, K including halo
  std::array<std::int64_t, 3> strides{1, 0, 0};  // element strides; K stride 0 for 2D fields
  std::array<std::int64_t, 3> origin{0, 0, 0};   // halo below the interior per dim
  std::int64_t pre_pad = 0;
  std::int64_t alignment = 1;
  std::int64_t size = 0;  // total elements including padding
  std::array<Dim, 3> dim_layout{Dim::I, Dim::J, Dim::K};  // fastest to slowest

  /// Linear element index of interior-relative coordinates.
  std::int64_t index(std::int64_t i, std::int64_t j, std::int64_t k) const {
    return pre_pad + (i + origin[0]) * strides[0] + (j + origin[1]) * strides[1] +
           (k + origin[2]) * strides[2];
  }
};

Layout allocate_layout(bool has_k, const Extent& extent, const Domain& domain, std::int64_t alignment);
Layout allocate_layout(const FieldDecl& field, const Extent& extent, const Domain& domain,
                       std::int64_t alignment);

}  // namespace sf
