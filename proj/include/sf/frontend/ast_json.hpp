#pragma once

#include "json.hpp"
#include "sf/frontend/ast.hpp"

namespace sf {

nlohmann::json expr_to_json(const Expr& e);
Expr expr_from_json(const nlohmann::json& j);
nlohmann::json block_to_json(const ComputationBlock& b);
ComputationBlock block_from_json(const nlohmann::json& j);
nlohmann::json program_to_json(const StencilProgram& program);

}  // namespace sf
