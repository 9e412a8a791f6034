#include "llql/catalog.hpp"

#include <fstream>

#include "llql/error.hpp"

namespace llql {

const Catalog::Relation* Catalog::relation(const std::string& name) const {
  auto it = relations.find(name);
  return it == relations.end() ? nullptr : &it->second;
}

double Catalog::attr_distinct(const std::string& rel,
                              const std::string& attr) const {
  const Relation* r = relation(rel);
  if (!r) return 0;
  auto it = r->distinct.find(attr);
  return it == r->distinct.end() ? r->card : it->second;
}

std::optional<double> Catalog::selectivity(
    const std::string& predicate_key) const {
  auto it = predicates.find(predicate_key);
  if (it == predicates.end()) return std::nullopt;
  return it->second;
}

std::optional<double> Catalog::symbol_card(const std::string& symbol) const {
  auto it = symbol_cards.find(symbol);
  if (it == symbol_cards.end()) return std::nullopt;
  return it->second;
}

nlohmann::json Catalog::to_json() const {
  nlohmann::json rels = nlohmann::json::object();
  for (const auto& [name, r] : relations) {
    nlohmann::json rj;
    rj["card"] = r.card;
    if (r.inner_card > 0) rj["inner_card"] = r.inner_card;
    rj["distinct"] = r.distinct;
    rels[name] = rj;
  }
  nlohmann::json j;
  j["relations"] = rels;
  j["predicates"] = predicates;
  j["default_sel"] = default_sel;
  if (!symbol_cards.empty()) j["symbols"] = symbol_cards;
  return j;
}

Catalog Catalog::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("catalog must be a JSON object");
  Catalog c;
  try {
    nlohmann::json rels = j.value("relations", nlohmann::json::object());
    for (const auto& [name, rj] : rels.items()) {
      Relation r;
      r.card = rj.at("card").get<double>();
      r.inner_card = rj.value("inner_card", 0.0);
      if (rj.contains("distinct"))
        r.distinct = rj.at("distinct").get<std::map<std::string, double>>();
      c.relations.emplace(name, std::move(r));
    }
    if (j.contains("predicates"))
      c.predicates = j.at("predicates").get<std::map<std::string, double>>();
    c.default_sel = j.value("default_sel", 0.5);
    if (j.contains("symbols"))
      c.symbol_cards = j.at("symbols").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed catalog: ") + e.what());
  }
  return c;
}

void Catalog::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << to_json().dump(2) << "\n";
}

Catalog Catalog::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read catalog " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed catalog " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace llql
