#pragma once

#include <string>

#include "llql/ast.hpp"
#include "json.hpp"

namespace llql {

// Text forms re-parse to structurally identical ASTs.
std::string print_type(const LType& t);
std::string print_expr(const Expr& e);
std::string print_program(const Program& p);

// Canonical single-line form used as a lookup key for predicate selectivities.
std::string predicate_key(const Expr& e);

nlohmann::json type_to_json(const LType& t);
nlohmann::json ast_to_json(const Program& p);

// Shortest decimal form that round-trips; always contains '.' or 'e'.
std::string format_real(double v);

}  // namespace llql
