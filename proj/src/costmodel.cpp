#include "llql/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "llql/error.hpp"
#include "llql/registry.hpp"

namespace llql {

namespace {

std::string combo_key(const std::string& impl, const std::string& op,
                      bool ordered) {
  return impl + "|" + op + "|" + (ordered ? "1" : "0");
}

const char* kOps[] = {"insert", "lookup_hit", "lookup_miss"};

size_t op_index(const std::string& op) {
  for (size_t i = 0; i < 3; ++i)
    if (op == kOps[i]) return i;
  throw ModelError("unknown operation '" + op + "'");
}

}  // namespace

std::string cost_mode_name(CostModel::Mode m) {
  return m == CostModel::Mode::PerCombination ? "per_combination" : "all_in_one";
}

CostModel::Mode cost_mode_from_name(const std::string& s) {
  if (s == "per_combination") return CostModel::Mode::PerCombination;
  if (s == "all_in_one") return CostModel::Mode::AllInOne;
  throw UsageError("unknown cost model mode '" + s +
                   "' (want per_combination or all_in_one)");
}

std::vector<double> CostModel::features(double count, double size) const {
  if (fc_.log_features) return {std::log2(size + 1.0), std::log2(count)};
  return {size, count};
}

// In log mode the regression target is log2 milliseconds: batch cost is
// multiplicative in count and size, and averaging raw milliseconds across
// neighbouring grid cells (knn) would be dominated by the largest cell.
double CostModel::target_of(double ms) const {
  return fc_.log_features ? std::log2(ms + 1e-9) : ms;
}

double CostModel::target_inverse(double pred) const {
  return fc_.log_features ? std::exp2(pred) - 1e-9 : pred;
}

std::vector<double> CostModel::all_in_one_features(const std::string& impl,
                                                   const std::string& op,
                                                   bool ordered, double count,
                                                   double size) const {
  std::vector<double>x(impls_.size() + 3 + 1, 0.0);
  auto it = std::find(impls_.begin(), impls_.end(), impl);
  if (it == impls_.end())
    throw ModelError("cost model was not trained on implementation '" + impl +
                     "'");
  x[static_cast<size_t>(it - impls_.begin())] = 1.0;
  x[impls_.size() + op_index(op)] = 1.0;
  x[impls_.size() + 3] = ordered ? 1.0 : 0.0;
  for (double f : features(count, size)) x.push_back(f);
  return x;
}

CostModel CostModel::train(const std::vector<ProfileSample>& samples,
                           Mode mode, const std::string& regressor,
                           FeatureConfig fc) {
  if (samples.empty()) throw ModelError("no profile samples to train on");
  CostModel m;
  m.mode_ = mode;
  m.regressor_ = regressor;
  m.fc_ = fc;
  for (const ProfileSample& s : samples)
    if (std::find(m.impls_.begin(), m.impls_.end(), s.impl) == m.impls_.end())
      m.impls_.push_back(s.impl);

  auto note_ridge = [&m](const Regressor& r) {
    if (auto* lin = dynamic_cast<const LinearModel*>(&r))
      m.ridge_warning_ |= lin->ridge_fallback;
    if (auto* p2 = dynamic_cast<const Poly2Model*>(&r))
      m.ridge_warning_ |= p2->lin.ridge_fallback;
  };

  if (mode == Mode::PerCombination) {
    std::map<std::string, std::pair<std::vector<std::vector<double>>,
                                    std::vector<double>>> groups;
    for (const ProfileSample& s : samples) {
      auto& g = groups[combo_key(s.impl, s.op, s.ordered)];
      g.first.push_back(m.features(static_cast<double>(s.accessed),
                                   static_cast<double>(s.dict_size)));
      g.second.push_back(m.target_of(s.elapsed_ms));
    }
    for (auto& [key, g] : groups) {
      auto r = fit_regressor(regressor, g.first, g.second);
      note_ridge(*r);
      m.combos_.emplace(key, std::move(r));
    }
  } else {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (const ProfileSample& s : samples) {
      X.push_back(m.all_in_one_features(s.impl, s.op, s.ordered,
                                        static_cast<double>(s.accessed),
                                        static_cast<double>(s.dict_size)));
      y.push_back(m.target_of(s.elapsed_ms));
    }
    m.single_ = fit_regressor(regressor, X, y);
    note_ridge(*m.single_);
  }
  return m;
}

const Regressor* CostModel::combo(const std::string& impl,
                                  const std::string& op, bool ordered) const {
  auto it = combos_.find(combo_key(impl, op, ordered));
  return it == combos_.end() ? nullptr : it->second.get();
}

double CostModel::delta(const std::string& impl, const std::string& op,
                        bool ordered, double count, double size) const {
  if (count <= 0) return 0.0;
  double pred;
  if (mode_ == Mode::AllInOne) {
    if (!single_) throw ModelError("cost model is untrained");
    pred = single_->predict(all_in_one_features(impl, op, ordered, count, size));
  } else {
    const Regressor* r = combo(impl, op, ordered);
    // Ordered misses against a sort-based dictionary behave like ordered
    // hits (same binary search, no probe chain), so alias when unmeasured.
    if (!r && ordered && op == "lookup_miss")
      r = combo(impl, "lookup_hit", true);
    if (!r && ordered) r = combo(impl, op, false);
    if (!r)
      throw ModelError("cost model has no data for " +
                       combo_key(impl, op, ordered));
    pred = r->predict(features(count, size));
  }
  return std::max(0.0, target_inverse(pred));
}

nlohmann::json CostModel::to_json() const {
  nlohmann::json j;
  j["version"] = 1;
  j["mode"] = cost_mode_name(mode_);
  j["regressor"] = regressor_;
  j["log_features"] = fc_.log_features;
  j["impls"] = impls_;
  j["ridge_warning"] = ridge_warning_;
  if (mode_ == Mode::PerCombination) {
    nlohmann::json combos = nlohmann::json::object();
    for (const auto& [key, r] : combos_) combos[key] = r->to_json();
    j["combos"] = combos;
  } else {
    j["model"] = single_->to_json();
  }
  return j;
}

CostModel CostModel::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version"))
    throw ModelError("not a cost model file");
  if (j.at("version").get<int>() != 1)
    throw ModelError("unsupported cost model version");
  CostModel m;
  m.mode_ = cost_mode_from_name(j.at("mode").get<std::string>());
  m.regressor_ = j.at("regressor").get<std::string>();
  m.fc_.log_features = j.at("log_features").get<bool>();
  m.impls_ = j.at("impls").get<std::vector<std::string>>();
  m.ridge_warning_ = j.value("ridge_warning", false);
  if (m.mode_ == Mode::PerCombination) {
    for (const auto& [key, rj] : j.at("combos").items())
      m.combos_.emplace(key, Regressor::from_json(rj));
  } else {
    m.single_ = Regressor::from_json(j.at("model"));
  }
  return m;
}

void CostModel::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path);
  f << to_json().dump(1) << "\n";
}

CostModel CostModel::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ModelError("cannot read model file " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError("malformed model file " + path + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace llql
