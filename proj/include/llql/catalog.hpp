#pragma once

#include <map>
#include <optional>
#include <string>

#include "json.hpp"

namespace llql {

// Statistics the cost rules draw from: per-relation cardinalities and
// per-attribute distinct counts, selectivities keyed by a predicate's
// printed form, and optional exact entry counts for named dictionary
// symbols (e.g. measured by running the interpreter on a sample).
struct Catalog {
  struct Relation {
    double card = 0;        // top-level entries
    double inner_card = 0;  // average nested-dictionary size, 0 for flat
    std::map<std::string, double> distinct;  // attribute -> distinct values
  };

  std::map<std::string, Relation> relations;
  std::map<std::string, double> predicates;
  double default_sel = 0.5;
  std::map<std::string, double> symbol_cards;

  const Relation* relation(const std::string& name) const;
  // Unknown attributes fall back to the relation's cardinality.
  double attr_distinct(const std::string& rel, const std::string& attr) const;
  std::optional<double> selectivity(const std::string& predicate_key) const;
  std::optional<double> symbol_card(const std::string& symbol) const;

  nlohmann::json to_json() const;
  static Catalog from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Catalog load(const std::string& path);
};

}  // namespace llql
