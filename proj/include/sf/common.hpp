#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sf {

struct SourceLoc {
  int line = 0;
  int col = 0;
};

/// One problem found in a program or graph. Printed as
/// `file:line:col: category: message`.
struct Diagnostic {
  std::string category;
  std::string message;
  SourceLoc loc;

  std::string format(const std::string& file) const;
};

/// Raised for user-facing errors (bad input, syntax, invalid requests).
class Error : public std::runtime_error {
 public:
  Error(std::string category, std::string message, SourceLoc loc = {})
      : std::runtime_error(message), category_(std::move(category)), loc_(loc) {}

  const std::string& category() const { return category_; }
  SourceLoc loc() const { return loc_; }
  Diagnostic diagnostic() const { return {category_, what(), loc_}; }

 private:
  std::string category_;
  SourceLoc loc_;
};

/// Raised when an internal invariant is violated (CLI exit code 2).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class Dim : int { I = 0, J = 1, K = 2 };

inline const char* dim_name(Dim d) {
  switch (d) {
    case Dim::I: return "I";
    case Dim::J: return "J";
    case Dim::K: return "K";
  }
  return "?";
}

/// Problem size plus the placement of this rank on the tile: which tile edges
/// the subdomain owns. Regions anchored on an edge not owned resolve empty.
struct Domain {
  int ni = 1;
  int nj = 1;
  int nk = 1;
  bool west = true;   // owns i_start
  bool east = true;   // owns i_end
  bool south = true;  // owns j_start
  bool north = true;  // owns j_end

  int size(Dim d) const { return d == Dim::I ? ni : d == Dim::J ? nj : nk; }
  std::int64_t points() const { return std::int64_t(ni) * nj * nk; }
};

/// Half-open integer range [lo, hi).
struct Range {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  bool empty() const { return hi <= lo; }
  std::int64_t length() const { return empty() ? 0 : hi - lo; }
};

/// Axis-aligned box in (I, J, K) index space; coordinates are relative to the
/// first interior point of the domain (halo cells are negative / >= n).
struct Box {
  std::array<Range, 3> r;
  bool empty() const { return r[0].empty() || r[1].empty() || r[2].empty(); }
  std::int64_t volume() const {
    return empty() ? 0 : r[0].length() * r[1].length() * r[2].length();
  }
  Box intersect(const Box& o) const;
  bool contains(const Box& o) const;
};

/// Exact number of cells covered by a union of boxes.
std::int64_t union_volume(const std::vector<Box>& boxes);

}  // namespace sf
