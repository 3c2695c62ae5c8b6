#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sf/common.hpp"

namespace sf {

/// Schedule dimensions. Interval and Operation always appear as the adjacent
/// pair (Interval, Operation), the "IO group"; S (statement within a section)
/// is implicitly innermost.
enum class SDim { Interval, Operation, K, J, I };

const char* sdim_name(SDim d);

enum class CacheKind { None, Local, Shared };
enum class RegionStrategy { Predicated, Split };

const char* cache_name(CacheKind c);

using DimOrder = std::array<SDim, 5>;

/// Builds an order with the IO group inserted before spatial position `group`
/// (0 = outermost, 3 = innermost).
DimOrder make_order(int group, const std::array<Dim, 3>& spatial);
int group_position(const DimOrder& order);
std::array<Dim, 3> spatial_order(const DimOrder& order);
std::string order_string(const DimOrder& order);

/// All 24 legal orders in a fixed enumeration order.
const std::vector<DimOrder>& all_orders();

struct Schedule {
  DimOrder order = make_order(0, {Dim::K, Dim::J, Dim::I});
  std::array<bool, 3> map{true, true, true};  // indexed by Dim; false = sequential loop
  std::array<int, 3> tile{0, 0, 0};          // 0 = untiled; only on map dims
  std::map<std::string, CacheKind> caches;
  RegionStrategy region = RegionStrategy::Predicated;

  bool is_map(Dim d) const { return map[std::size_t(d)]; }
  int tile_of(Dim d) const { return tile[std::size_t(d)]; }
  CacheKind cache_of(const std::string& f) const {
    auto it = caches.find(f);
    return it == caches.end() ? CacheKind::None : it->second;
  }
  std::string describe() const;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

}  // namespace sf
