#include "sf/common.hpp"

#include <algorithm>

namespace sf {

std::string Diagnostic::format(const std::string& file) const {
  return file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.col) + ": " +
         category + ": " + message;
}

Box Box::intersect(const Box& o) const {
  Box out;
  for (int d = 0; d < 3; ++d) {
    out.r[d].lo = std::max(r[d].lo, o.r[d].lo);
    out.r[d].hi = std::min(r[d].hi, o.r[d].hi);
  }
  return out;
}

bool Box::contains(const Box& o) const {
  if (o.empty()) return true;
  for (int d = 0; d < 3; ++d)
    if (o.r[d].lo < r[d].lo || o.r[d].hi > r[d].hi) return false;
  return true;
}

std::int64_t union_volume(const std::vector<Box>& boxes) {
  std::vector<Box> live;
  for (const auto& b : boxes)
    if (!b.empty()) live.push_back(b);
  if (live.empty()) return 0;
  if (live.size() == 1) return live[0].volume();

  // Coordinate compression: every elementary cell of the compressed grid is
  // either fully inside or fully outside each box.
  std::array<std::vector<std::int64_t>, 3> cuts;
  for (const auto& b : live)
    for (int d = 0; d < 3; ++d) {
      cuts[d].push_back(b.r[d].lo);
      cuts[d].push_back(b.r[d].hi);
    }
  for (auto& c : cuts) {
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
  }
  std::int64_t total = 0;
  for (std::size_t a = 0; a + 1 < cuts[0].size(); ++a)
    for (std::size_t b = 0; b + 1 < cuts[1].size(); ++b)
      for (std::size_t c = 0; c + 1 < cuts[2].size(); ++c) {
        const std::int64_t x = cuts[0][a], y = cuts[1][b], z = cuts[2][c];
        for (const auto& bx : live) {
          if (x >= bx.r[0].lo && x < bx.r[0].hi && y >= bx.r[1].lo && y < bx.r[1].hi &&
              z >= bx.r[2].lo && z < bx.r[2].hi) {
            total += (cuts[0][a + 1] - x) * (cuts[1][b + 1] - y) * (cuts[2][c + 1] - z);
            break;
          }
        }
      }
  return total;
}

}  // namespace sf
