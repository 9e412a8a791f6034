#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "llql/ast.hpp"
#include "llql/value.hpp"

namespace llql {

// A let-bound dictionary constructor; these are the tuning targets.
struct DictSymbol {
  std::string name;
  const Expr* let_node;
  const Expr* ctor;
};

// Symbols in textual order.  Throws TypeError when two dictionary symbols
// share a name; names must be unique program-wide.
std::vector<DictSymbol> extract_dict_symbols(const Program& p);

struct TypedProgram {
  Program program;
  Semiring semiring;
  std::unordered_map<const Expr*, LType> types;
  std::vector<DictSymbol> dict_symbols;

  const LType& type_of(const Expr& e) const;
  const DictSymbol* symbol(const std::string& name) const;
};

// Infers a type for every subexpression.  Numeric operators widen int to
// double; `+=` accepts any delta addable into the target (int into double,
// records fieldwise, dictionaries keywise).  Types left unconstrained
// (e.g. the element type of an empty dictionary nothing writes into)
// default to int.
TypedProgram infer_types(const Program& p);

}  // namespace llql
