#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "llql/catalog.hpp"
#include "llql/costmodel.hpp"
#include "llql/typecheck.hpp"

namespace llql {

// Per-call nanosecond constants for scalar expression evaluation.  The
// defaults suit a recent x86 core; calibrated() rescales them by timing a
// small accumulation loop through the interpreter.
struct ScalarCosts {
  double node_ns = 1.2;          // generic expression node
  double record_field_ns = 6.0;  // per constructed record field
  double key_encode_ns = 18.0;   // key encoding at a dictionary operation
  double iter_step_ns = 12.0;    // per loop iteration
  static ScalarCosts calibrated();
};

struct CostOptions {
  std::map<std::string, std::string> assignment;  // symbol -> implementation
  std::string input_impl = "sorted_array";        // unannotated inputs
  // Implementation assumed for unresolved, unassigned symbols; when empty
  // such a symbol is an error (the program still needs tuning).
  std::string default_impl;
  bool trace = false;
  bool symbolic = false;  // emit the closed form instead of calling the model
  ScalarCosts scalar;
};

struct CostBreakdown {
  double total_ms = 0;
  double scalar_ms = 0;
  std::map<std::string, double> per_dict_ms;  // symbol / input / "(inline)"
  std::string symbolic;
  nlohmann::json trace = nlohmann::json::array();
};

// Static cost estimate of a typed program under catalog statistics.
// `model` may be null only in symbolic mode.  Hinted access to a symbol
// assigned a hash implementation yields an infinite total.
CostBreakdown infer_cost(const TypedProgram& tp, const Catalog& cat,
                         const CostModel* model, const CostOptions& opt = {});

}  // namespace llql
