#pragma once

#include <string>
#include <string_view>

#include "llql/ast.hpp"

namespace llql {

// Parses a program: `input` declarations, optional `pragma semiring`, body.
// Throws ParseError on malformed input, including a hinted access whose
// iterator variable is not bound to `d.iter` in an enclosing let.
Program parse_program(std::string_view text);

// Parses a single expression (no headers).
ExprPtr parse_expr_text(std::string_view text);

LType parse_type_text(std::string_view text);

}  // namespace llql
