#pragma once

#include <string>
#include <string_view>

#include "sf/frontend/ast.hpp"

namespace sf {

/// Parses DSL source text. Throws Error("syntax error", ...) carrying the
/// line/column of the first problem.
StencilProgram parse_program(std::string_view text);

/// Reads and parses a `.stn` file.
StencilProgram parse_file(const std::string& path);

/// Canonical source text; parse(print(parse(x))) == parse(x).
std::string print_program(const StencilProgram& program);

/// Structural equality of two programs, ignoring source locations.
bool same_program(const StencilProgram& a, const StencilProgram& b);

}  // namespace sf
