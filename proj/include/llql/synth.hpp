#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "llql/costinfer.hpp"

namespace llql {

struct DepEdge {
  std::string from, to;
};

// Symbol dependency graph: edge A -> B when a statement populating B reads
// or iterates A (via its key or value expressions, or an enclosing loop).
std::vector<DepEdge> dependency_graph(const TypedProgram& tp);

// Every dictionary symbol, topologically sorted by the dependency graph;
// textual order breaks ties (and any cycles).
std::vector<std::string> topo_order(const TypedProgram& tp);

// Symbols accessed through hinted operations; these only run on ordered
// implementations.
std::set<std::string> hinted_symbols(const TypedProgram& tp);

struct SynthReport {
  std::vector<std::string> order;  // tuning holes in the order visited
  std::map<std::string, std::string> chosen;
  // symbol -> candidate implementation -> whole-program estimated ms
  std::map<std::string, std::map<std::string, double>> candidate_ms;
  double final_ms = 0;

  nlohmann::json to_json() const;
};

struct SynthResult {
  Program tuned;  // annotations resolved at every tuning hole
  std::map<std::string, std::string> assignment;
  SynthReport report;
};

// Greedy per-symbol argmin of the whole-program estimated cost.  Only
// unresolved (@dict) constructors are tuned; resolved annotations are kept.
// Candidates come from `impls` (argmin ties keep the earlier entry);
// hint-accessed symbols only consider ordered implementations.  `refine`
// adds one more argmin pass with all other choices fixed.
SynthResult synthesize(const TypedProgram& tp, const Catalog& cat,
                       const CostModel& model,
                       const std::vector<std::string>& impls,
                       bool refine = false, CostOptions base = {});

// Brute force over every candidate combination (for verifying the greedy
// result on small programs).  Returns the best assignment; best_ms, when
// nonnull, receives its estimated cost.
std::map<std::string, std::string> exhaustive_assignment(
    const TypedProgram& tp, const Catalog& cat, const CostModel& model,
    const std::vector<std::string>& impls, CostOptions base = {},
    double* best_ms = nullptr);

// The same program with each assigned symbol's constructor annotation
// replaced by the chosen implementation.
Program choose_dict_ds(const TypedProgram& tp,
                       const std::map<std::string, std::string>& assignment);

}  // namespace llql
