#include "sf/frontend/validate.hpp"

#include <cmath>
#include <set>

namespace sf {

namespace {

struct DriverEnv {
  const StencilProgram& prog;
  std::map<std::string, double> vars;
  std::set<std::string> tainted;  // driver vars derived from runtime parameters
  std::vector<StencilCall> calls;

  // Evaluates `e`; `taint` is set when a runtime parameter was consulted.
  double eval(const Expr& e, bool& taint) {
    NameLookup names = [&](const std::string& n) -> std::optional<double> {
      if (auto it = vars.find(n); it != vars.end()) {
        if (tainted.count(n)) taint = true;
        return it->second;
      }
      if (const auto* c = prog.find_config(n)) return c->value;
      if (const auto* p = prog.find_param(n); p && !p->is_array) {
        taint = true;
        return p->values[0];
      }
      return std::nullopt;
    };
    IndexLookup index = [&](const std::string& n, long i) -> std::optional<double> {
      const auto* p = prog.find_param(n);
      if (!p || i < 0 || std::size_t(i) >= p->values.size()) return std::nullopt;
      taint = true;
      return p->values[std::size_t(i)];
    };
    return eval_scalar(e, names, index);
  }

  double control(const Expr& e, const char* what) {
    bool taint = false;
    const double v = eval(e, taint);
    if (taint)
      throw Error("unresolvable control flow",
                  std::string(what) + " depends on a runtime parameter", e.loc);
    return v;
  }

  void run(const std::vector<DriverStmt>& body) {
    for (const auto& d : body) {
      switch (d.kind) {
        case DriverStmt::Kind::Call: {
          StencilCall call{d.name, {}};
          for (const auto& [k, v] : d.args) {
            bool taint = false;
            call.params[k] = eval(v, taint);
          }
          calls.push_back(std::move(call));
          if (calls.size() > 1000000)
            throw Error("unresolvable control flow", "driver expands to too many calls", d.loc);
          break;
        }
        case DriverStmt::Kind::Assign: {
          bool taint = false;
          vars[d.name] = eval(d.value, taint);
          if (taint)
            tainted.insert(d.name);
          else
            tainted.erase(d.name);
          break;
        }
        case DriverStmt::Kind::For: {
          const double n = control(d.value, "loop trip count");
          if (n < 0 || std::floor(n) != n)
            throw Error("unresolvable control flow", "loop trip count must be a non-negative integer",
                        d.value.loc);
          for (long t = 0; t < long(n); ++t) {
            vars[d.name] = double(t);
            tainted.erase(d.name);
            run(d.body);
          }
          break;
        }
        case DriverStmt::Kind::If:
          if (control(d.value, "branch condition") != 0.0)
            run(d.body);
          else
            run(d.orelse);
          break;
      }
    }
  }
};

bool single_level(const Interval& iv) {
  return iv.start.anchor == iv.end.anchor && iv.end.offset - iv.start.offset == 1;
}

bool interval_empty_always(const Interval& iv) {
  if (iv.start.anchor == iv.end.anchor) return iv.end.offset <= iv.start.offset;
  // End-anchored start with Start-anchored end is empty for every large nk.
  return iv.start.anchor == Level::Anchor::End;
}

bool intervals_overlap(const Interval& a, const Interval& b) {
  for (int nk = 1; nk <= 64; ++nk) {
    const Range x = a.resolve(nk);
    const Range y = b.resolve(nk);
    if (x.empty() || y.empty()) continue;
    if (std::max(x.lo, y.lo) < std::min(x.hi, y.hi)) return true;
  }
  return false;
}

void collect_driver_calls(const std::vector<DriverStmt>& body, std::vector<const DriverStmt*>& out) {
  for (const auto& d : body) {
    if (d.kind == DriverStmt::Kind::Call) out.push_back(&d);
    collect_driver_calls(d.body, out);
    collect_driver_calls(d.orelse, out);
  }
}

}  // namespace

std::vector<StencilCall> resolve_driver(const StencilProgram& program) {
  DriverEnv env{program, {}, {}, {}};
  env.run(program.driver);
  return std::move(env.calls);
}

std::map<std::string, double> default_params(const StencilProgram& program) {
  std::map<std::string, double> out;
  for (const auto& p : program.params)
    if (!p.is_array) out[p.name] = p.values[0];
  return out;
}

std::vector<Diagnostic> validate(const StencilProgram& prog) {
  std::vector<Diagnostic> diags;
  auto report = [&](std::string cat, std::string msg, SourceLoc loc) {
    diags.push_back({std::move(cat), std::move(msg), loc});
  };

  std::map<std::string, SourceLoc> names;
  auto declare = [&](const std::string& n, SourceLoc loc) {
    if (!names.emplace(n, loc).second) report("duplicate name", "'" + n + "' is declared more than once", loc);
  };
  for (const auto& f : prog.fields) declare(f.name, f.loc);
  for (const auto& p : prog.params) declare(p.name, p.loc);
  for (const auto& c : prog.configs) declare(c.name, c.loc);
  for (const auto& s : prog.stencils) declare(s.name, s.loc);

  std::vector<const DriverStmt*> calls;
  collect_driver_calls(prog.driver, calls);
  std::map<std::string, std::set<std::string>> bound;  // stencil -> names bound at call sites
  for (const auto* c : calls) {
    if (!prog.find_stencil(c->name))
      report("unknown stencil", "call to undefined stencil '" + c->name + "'", c->loc);
    for (const auto& a : c->args) bound[c->name].insert(a.first);
  }

  for (const auto& s : prog.stencils) {
    for (std::size_t bi = 0; bi < s.blocks.size(); ++bi) {
      const auto& b = s.blocks[bi];
      if (interval_empty_always(b.interval))
        report("invalid interval", "interval start is not below its end", b.loc);
      for (std::size_t bj = 0; bj < bi; ++bj) {
        const auto& o = s.blocks[bj];
        if (o.computation == b.computation && intervals_overlap(o.interval, b.interval))
          report("overlapping intervals", "interval overlaps an earlier interval of the same computation",
                 b.loc);
      }

      std::set<std::string> written;
      for (const auto& st : b.statements) written.insert(st.target);

      for (const auto& st : b.statements) {
        const FieldDecl* target = prog.find_field(st.target);
        if (!target) {
          report("undeclared field", "assignment to undeclared field '" + st.target + "'", st.loc);
        } else if (!target->has_k && !single_level(b.interval)) {
          report("invalid interval", "2D field '" + st.target + "' written over more than one level",
                 st.loc);
        }
        visit(st.value, [&](const Expr& e) {
          if (e.kind == ExprKind::FieldRef) {
            const FieldDecl* f = prog.find_field(e.name);
            if (!f) {
              report("undeclared field", "read of undeclared field '" + e.name + "'", e.loc);
              return;
            }
            if (!f->has_k && e.offset.dk != 0)
              report("dimension mismatch", "vertical offset on 2D field '" + e.name + "'", e.loc);
            if (b.policy == Policy::Parallel && e.offset.dk != 0 && written.count(e.name))
              report("vertical dependency in PARALLEL block",
                     "'" + e.name + "' is read at a vertical offset and written in the same block", e.loc);
            if (e.name == st.target && !e.offset.horizontal_zero())
              report("self-referencing offset",
                     "'" + e.name + "' reads itself at a horizontal offset", e.loc);
          } else if (e.kind == ExprKind::Name) {
            const auto* p = prog.find_param(e.name);
            const bool ok = (p && !p->is_array) || prog.find_config(e.name) ||
                            bound[s.name].count(e.name);
            if (!ok) report("unknown name", "unknown scalar '" + e.name + "'", e.loc);
          } else if (e.kind == ExprKind::Index) {
            report("unknown name", "indexing is only allowed in the driver", e.loc);
          }
        });
      }
    }
  }

  try {
    (void)resolve_driver(prog);
  } catch (const Error& e) {
    report(e.category() == "unresolvable control flow" ? e.category() : "unresolvable control flow",
           e.what(), e.loc());
  }
  return diags;
}

void require_valid(const StencilProgram& program) {
  auto d = validate(program);
  if (!d.empty()) throw Error(d[0].category, d[0].message, d[0].loc);
}

}  // namespace sf
