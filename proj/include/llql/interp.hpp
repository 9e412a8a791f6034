#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "llql/dict.hpp"
#include "llql/typecheck.hpp"
#include "llql/value.hpp"

namespace llql {

struct Database {
  std::map<std::string, Value> inputs;  // dictionary values by input name
};

struct RunResult {
  Value result;
  double wall_ms = 0.0;
  OpCounters counters;  // summed over every dictionary the run touched
  std::map<std::string, uint64_t> symbol_sizes;  // final per-symbol entry count
};

// Evaluates a typed program against a database.  `assignment` supplies
// implementations for dictionary symbols whose constructors carry an
// unresolved @dict annotation; `force_impl` overrides every constructor.
class Interpreter {
 public:
  Interpreter(const TypedProgram& tp, const Database& db,
              std::map<std::string, std::string> assignment = {},
              std::string force_impl = "");

  Value eval_program();
  RunResult run();

 private:
  Value eval(const Expr& e);
  Value eval_binop(const Expr& e);
  Value lookup_result(const DictHandle& d, const Cursor& c);
  std::shared_ptr<DictHandle> eval_dict(const Expr& e);
  std::string ctor_impl(const Expr& ctor) const;
  Value make_zero(const LType& t, const std::string& fallback_impl);

  const TypedProgram& tp_;
  const Database& db_;
  std::map<std::string, std::string> assignment_;
  std::string force_impl_;
  Semiring sr_;
  std::map<const Expr*, const DictSymbol*> ctor_symbol_;
  std::vector<std::pair<std::string, Value>> env_;
  std::vector<std::shared_ptr<DictHandle>> created_;
  std::map<std::string, std::shared_ptr<DictHandle>> symbol_handles_;

  friend RunResult run_program(const TypedProgram&, const Database&,
                               const std::map<std::string, std::string>&,
                               const std::string&);
};

RunResult run_program(const TypedProgram& tp, const Database& db,
                      const std::map<std::string, std::string>& assignment = {},
                      const std::string& force_impl = "");

// Collects every dictionary handle reachable from a value.
void collect_handles(const Value& v,
                     std::vector<std::shared_ptr<DictHandle>>& out);

}  // namespace llql
