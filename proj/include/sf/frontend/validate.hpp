#pragma once

#include <vector>

#include "sf/frontend/ast.hpp"

namespace sf {

/// Checks a parsed program. Returns one diagnostic per violation; an empty
/// list means the program is well-formed.
///
/// Categories: "undeclared field", "dimension mismatch",
/// "vertical dependency in PARALLEL block", "unresolvable control flow",
/// "duplicate name", "overlapping intervals", "self-referencing offset",
/// "unknown stencil", "unknown name", "invalid interval".
std::vector<Diagnostic> validate(const StencilProgram& program);

/// Throws the first diagnostic of validate() as an Error.
void require_valid(const StencilProgram& program);

}  // namespace sf
