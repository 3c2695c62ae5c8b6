#pragma once
#include <map>
#include <set>
#include <string>
#include <vector>

#include "sf/pipeline/corpus.hpp"
#include "doctest.h"
#include "sf/frontend/extents.hpp"
#include "sf/exec/reference.hpp"
#include "sf/frontend/parser.hpp"

namespace doctest {
template <>
struct StringMaker<sf::Extent> {
  static String convert(const sf::Extent& e) {
    std::string s = "lo(" + std::to_string(e.lo[0]) + "," + std::to_string(e.lo[1]) + "," + std::to_string(e.lo[2]) +
                    ") hi(" + std::to_string(e.hi[0]) + "," + std::to_string(e.hi[1]) + "," + std::to_string(e.hi[2]) + ")";
    return s.c_str();
  }
};
}  // namespace doctest

namespace sf::test {

inline DataflowGraph graph_of(const std::string& src, const Domain& d) {
  return compile_program(parse_program(src), d);
}

// Unique (read, write) element counts per container and per call, recorded
// while the reference interpreter runs.
using AccessCounts = std::map<std::string, std::pair<std::size_t, std::size_t>>;
inline std::vector<AccessCounts> unique_accesses(const DataflowGraph& g) {
  const RefProgram prog = reference_program(g);
  DenseSet d = reference_inputs(prog, 1);
  std::vector<std::map<std::string, std::pair<std::set<std::int64_t>, std::set<std::int64_t>>>> seen(prog.calls.size());
  RefObserver obs = [&](int call, int, const std::string& f, std::int64_t idx, bool write) {
    auto& e = seen[std::size_t(call)][f];
    (write ? e.second : e.first).insert(idx);
  };
  run_reference(prog, d, &obs);
  std::vector<AccessCounts> out(seen.size());
  for (std::size_t c = 0; c < seen.size(); ++c)
    for (const auto& [f, rw] : seen[c]) out[c][f] = {rw.first.size(), rw.second.size()};
  return out;
}

inline const char* kCopy = R"(field inp: float64[I, J, K]
field out: float64[I, J, K]

stencil copy:
    with computation(PARALLEL), interval(...):
        out = inp

driver:
    copy()
)";

inline const char* kThreePoint = R"(field inp: float64[I, J, K]
field out: float64[I, J, K]

stencil avg:
    with computation(PARALLEL), interval(...):
        out = inp[-1, 0, 0] + inp + inp[1, 0, 0]

driver:
    avg()
)";

// tmp from inp[-1..1, 0, 0], out from tmp[0, -2..0, 0]
inline const char* kChain = R"(field inp: float64[I, J, K]
field out: float64[I, J, K]
temp tmp: float64[I, J, K]

stencil s1:
    with computation(PARALLEL), interval(...):
        tmp = inp[-1, 0, 0] + inp[1, 0, 0]

stencil s2:
    with computation(PARALLEL), interval(...):
        out = tmp[0, -2, 0] + tmp[0, -1, 0] + tmp

driver:
    s1()
    s2()
)";

inline const char* kCumsum = R"(field inp: float64[I, J, K]
field a: float64[I, J, K]

stencil cumsum:
    with computation(FORWARD):
        with interval(0, 1):
            a = inp
        with interval(1, None):
            a = a[0, 0, -1] + inp

driver:
    cumsum()
)";

}  // namespace sf::test
