#include <sstream>

#include "sf/frontend/parser.hpp"

namespace sf {

namespace {

std::string level_text(const Level& l, bool is_end) {
  if (l.anchor == Level::Anchor::End) return l.offset == 0 && is_end ? "None" : std::to_string(l.offset);
  return std::to_string(l.offset);
}

std::string bound_text(const AxisBound& b, char axis) {
  std::string s = std::string(1, axis) + (b.anchor == AxisBound::Anchor::Start ? "_start" : "_end");
  if (b.offset > 0) s += " + " + std::to_string(b.offset);
  if (b.offset < 0) s += " - " + std::to_string(-b.offset);
  return s;
}

std::string axis_text(const AxisConstraint& c, char axis) {
  if (c.full) return ":";
  if (c.point) return bound_text(*c.lo, axis);
  std::string s;
  if (c.lo) s += bound_text(*c.lo, axis);
  s += ":";
  if (c.hi) s += bound_text(*c.hi, axis);
  return s;
}

void print_driver(std::ostringstream& os, const std::vector<DriverStmt>& body, int depth) {
  const std::string pad(std::size_t(depth) * 4, ' ');
  for (const auto& d : body) {
    switch (d.kind) {
      case DriverStmt::Kind::Call: {
        os << pad << d.name << "(";
        for (std::size_t i = 0; i < d.args.size(); ++i) {
          if (i) os << ", ";
          os << d.args[i].first << "=" << to_string(d.args[i].second);
        }
        os << ")\n";
        break;
      }
      case DriverStmt::Kind::Assign:
        os << pad << d.name << " = " << to_string(d.value) << "\n";
        break;
      case DriverStmt::Kind::For:
        os << pad << "for " << d.name << " in range(" << to_string(d.value) << ")"
           << (d.unroll ? " unroll" : "") << ":\n";
        print_driver(os, d.body, depth + 1);
        break;
      case DriverStmt::Kind::If:
        os << pad << "if " << to_string(d.value) << ":\n";
        print_driver(os, d.body, depth + 1);
        if (!d.orelse.empty()) {
          os << pad << "else:\n";
          print_driver(os, d.orelse, depth + 1);
        }
        break;
    }
  }
}

void print_statements(std::ostringstream& os, const std::vector<Statement>& stmts,
                      const std::string& pad) {
  std::size_t i = 0;
  while (i < stmts.size()) {
    const auto& st = stmts[i];
    if (!st.region) {
      os << pad << st.target << " = " << to_string(st.value) << "\n";
      ++i;
      continue;
    }
    os << pad << "with horizontal(region[" << axis_text(st.region->i, 'i') << ", "
       << axis_text(st.region->j, 'j') << "]):\n";
    while (i < stmts.size() && stmts[i].region == st.region) {
      os << pad << "    " << stmts[i].target << " = " << to_string(stmts[i].value) << "\n";
      ++i;
    }
  }
}

bool same_driver(const std::vector<DriverStmt>& a, const std::vector<DriverStmt>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.kind != y.kind || x.name != y.name || x.unroll != y.unroll) return false;
    if (x.kind != DriverStmt::Kind::Call && !x.value.same(y.value)) return false;
    if (x.args.size() != y.args.size()) return false;
    for (std::size_t k = 0; k < x.args.size(); ++k)
      if (x.args[k].first != y.args[k].first || !x.args[k].second.same(y.args[k].second))
        return false;
    if (!same_driver(x.body, y.body) || !same_driver(x.orelse, y.orelse)) return false;
  }
  return true;
}

}  // namespace

std::string print_program(const StencilProgram& p) {
  std::ostringstream os;
  for (const auto& f : p.fields)
    os << (f.temporary ? "temp " : "field ") << f.name << ": " << element_name(f.element)
       << (f.has_k ? "[I, J, K]" : "[I, J]") << "\n";
  for (const auto& c : p.params) {
    os << "param " << c.name << " = ";
    if (c.is_array) {
      os << "[";
      for (std::size_t i = 0; i < c.values.size(); ++i)
        os << (i ? ", " : "") << format_number(c.values[i], false);
      os << "]\n";
    } else {
      os << format_number(c.values.at(0), false) << "\n";
    }
  }
  for (const auto& c : p.configs) os << "config " << c.name << " = " << format_number(c.value, c.integer) << "\n";

  for (const auto& s : p.stencils) {
    os << "\nstencil " << s.name << ":\n";
    std::size_t bi = 0;
    while (bi < s.blocks.size()) {
      std::size_t end = bi + 1;
      while (end < s.blocks.size() && s.blocks[end].computation == s.blocks[bi].computation) ++end;
      std::string pad = "    ";
      if (end - bi > 1) {
        os << pad << "with computation(" << policy_name(s.blocks[bi].policy) << "):\n";
        pad += "    ";
      }
      for (; bi < end; ++bi) {
        const auto& b = s.blocks[bi];
        const std::string iv = "interval(" + level_text(b.interval.start, false) + ", " +
                               level_text(b.interval.end, true) + "):\n";
        if (pad.size() == 4)
          os << pad << "with computation(" << policy_name(b.policy) << "), " << iv;
        else
          os << pad << "with " << iv;
        print_statements(os, b.statements, pad + "    ");
      }
    }
  }
  if (!p.driver.empty()) {
    os << "\ndriver:\n";
    print_driver(os, p.driver, 1);
  }
  return os.str();
}

bool same_program(const StencilProgram& a, const StencilProgram& b) {
  if (a.fields.size() != b.fields.size() || a.params.size() != b.params.size() ||
      a.configs.size() != b.configs.size() || a.stencils.size() != b.stencils.size())
    return false;
  for (std::size_t i = 0; i < a.fields.size(); ++i) {
    const auto& x = a.fields[i];
    const auto& y = b.fields[i];
    if (x.name != y.name || x.has_k != y.has_k || x.element != y.element ||
        x.temporary != y.temporary)
      return false;
  }
  for (std::size_t i = 0; i < a.params.size(); ++i)
    if (a.params[i].name != b.params[i].name || a.params[i].values != b.params[i].values ||
        a.params[i].is_array != b.params[i].is_array)
      return false;
  for (std::size_t i = 0; i < a.configs.size(); ++i)
    if (a.configs[i].name != b.configs[i].name || a.configs[i].value != b.configs[i].value)
      return false;
  for (std::size_t i = 0; i < a.stencils.size(); ++i) {
    const auto& x = a.stencils[i];
    const auto& y = b.stencils[i];
    if (x.name != y.name || x.blocks.size() != y.blocks.size()) return false;
    for (std::size_t k = 0; k < x.blocks.size(); ++k) {
      const auto& bx = x.blocks[k];
      const auto& by = y.blocks[k];
      if (bx.policy != by.policy || !(bx.interval == by.interval) ||
          bx.computation != by.computation ||
          bx.statements.size() != by.statements.size())
        return false;
      for (std::size_t m = 0; m < bx.statements.size(); ++m) {
        const auto& sx = bx.statements[m];
        const auto& sy = by.statements[m];
        if (sx.target != sy.target || !sx.value.same(sy.value) || sx.region != sy.region)
          return false;
      }
    }
  }
  return same_driver(a.driver, b.driver);
}

}  // namespace sf
