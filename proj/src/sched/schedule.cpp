#include "sf/sched/schedule.hpp"

#include <algorithm>

namespace sf {

const char* sdim_name(SDim d) {
  switch (d) {
    case SDim::Interval: return "Interval";
    case SDim::Operation: return "Operation";
    case SDim::K: return "K";
    case SDim::J: return "J";
    case SDim::I: return "I";
  }
  return "?";
}

const char* cache_name(CacheKind c) {
  switch (c) {
    case CacheKind::None: return "none";
    case CacheKind::Local: return "local";
    case CacheKind::Shared: return "shared";
  }
  return "?";
}

namespace {
SDim to_sdim(Dim d) { return d == Dim::I ? SDim::I : d == Dim::J ? SDim::J : SDim::K; }
}  // namespace

DimOrder make_order(int group, const std::array<Dim, 3>& spatial) {
  DimOrder o{};
  std::size_t p = 0;
  for (int s = 0; s <= 3; ++s) {
    if (s == group) {
      o[p++] = SDim::Interval;
      o[p++] = SDim::Operation;
    }
    if (s < 3) o[p++] = to_sdim(spatial[std::size_t(s)]);
  }
  return o;
}

int group_position(const DimOrder& order) {
  int spatial = 0;
  for (SDim d : order) {
    if (d == SDim::Interval) return spatial;
    if (d != SDim::Operation) ++spatial;
  }
  return 3;
}

std::array<Dim, 3> spatial_order(const DimOrder& order) {
  std::array<Dim, 3> out{};
  std::size_t p = 0;
  for (SDim d : order) {
    if (d == SDim::I) out[p++] = Dim::I;
    if (d == SDim::J) out[p++] = Dim::J;
    if (d == SDim::K) out[p++] = Dim::K;
  }
  return out;
}

std::string order_string(const DimOrder& order) {
  std::string s;
  for (SDim d : order) {
    if (!s.empty()) s += ",";
    s += sdim_name(d);
  }
  return s;
}

const std::vector<DimOrder>& all_orders() {
  static const std::vector<DimOrder> orders = [] {
    std::vector<DimOrder> out;
    std::array<Dim, 3> perm{Dim::K, Dim::J, Dim::I};
    std::vector<std::array<Dim, 3>> perms;
    std::sort(perm.begin(), perm.end());
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    for (int g = 0; g <= 3; ++g)
      for (const auto& p : perms) out.push_back(make_order(g, p));
    return out;
  }();
  return orders;
}

std::string Schedule::describe() const {
  std::string s = "order=" + order_string(order) + " map=";
  for (int d = 2; d >= 0; --d) s += map[std::size_t(d)] ? dim_name(Dim(d)) : "";
  s += " tile=";
  for (int d = 2; d >= 0; --d) s += std::to_string(tile[std::size_t(d)]) + (d ? "x" : "");
  for (const auto& [f, c] : caches) s += " " + f + ":" + cache_name(c);
  if (region == RegionStrategy::Split) s += " split";
  return s;
}

}  // namespace sf
