#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

#include "llql/profile.hpp"
#include "llql/regress.hpp"

namespace llql {

struct FeatureConfig {
  // Feature vector per sample: dictionary size and operation count, in log2
  // space by default (log2(size + 1), log2(count)).  Log mode also trains
  // against log2 milliseconds and exponentiates predictions, so the model
  // learns the multiplicative cost law.
  bool log_features = true;
};

// Learned batch-cost oracle over profile samples.  delta() answers "how many
// milliseconds do `count` operations of this kind cost against a dictionary
// of `size` entries", per implementation and key-orderedness.
class CostModel {
 public:
  enum class Mode { PerCombination, AllInOne };

  CostModel() = default;

  static CostModel train(const std::vector<ProfileSample>& samples, Mode mode,
                         const std::string& regressor, FeatureConfig fc = {});

  // Zero when count == 0 (no model call); otherwise the clamped-at-zero
  // prediction.  An ordered lookup_miss with no model of its own falls back
  // to the ordered lookup_hit model, then to the unordered model.
  double delta(const std::string& impl, const std::string& op, bool ordered,
               double count, double size) const;

  double delta_lus(const std::string& impl, bool ordered, double hits,
                   double size) const {
    return delta(impl, "lookup_hit", ordered, hits, size);
  }
  double delta_luf(const std::string& impl, bool ordered, double misses,
                   double size) const {
    return delta(impl, "lookup_miss", ordered, misses, size);
  }
  // Building a dictionary of n entries from empty: count = n, size = n.
  double delta_ins(const std::string& impl, bool ordered, double n) const {
    return delta(impl, "insert", ordered, n, n);
  }

  Mode mode() const { return mode_; }
  const std::string& regressor_kind() const { return regressor_; }
  const FeatureConfig& feature_config() const { return fc_; }
  const std::vector<std::string>& impls() const { return impls_; }
  bool ridge_warning() const { return ridge_warning_; }

  std::vector<double> features(double count, double size) const;
  // Direct access to one combination's regressor (null when absent).
  const Regressor* combo(const std::string& impl, const std::string& op,
                         bool ordered) const;

  nlohmann::json to_json() const;
  static CostModel from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static CostModel load(const std::string& path);

 private:
  Mode mode_ = Mode::PerCombination;
  std::string regressor_ = "knn4";
  FeatureConfig fc_;
  std::vector<std::string> impls_;  // one-hot order for all-in-one mode
  std::map<std::string, std::unique_ptr<Regressor>> combos_;
  std::unique_ptr<Regressor> single_;
  bool ridge_warning_ = false;

  std::vector<double> all_in_one_features(const std::string& impl,
                                          const std::string& op, bool ordered,
                                          double count, double size) const;
  double target_of(double ms) const;
  double target_inverse(double pred) const;
};

std::string cost_mode_name(CostModel::Mode m);
CostModel::Mode cost_mode_from_name(const std::string& s);

}  // namespace llql
