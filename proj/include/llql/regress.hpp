#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace llql {

// Bit-exact double <-> decimal string conversion used by model files.
std::string double_to_string(double v);
double double_from_string(const std::string& s);

struct Standardizer {
  std::vector<double> mean, stdev;

  void fit(const std::vector<std::vector<double>>& X);
  std::vector<double> transform(const std::vector<double>& x) const;
};

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual double predict(const std::vector<double>& x) const = 0;
  virtual std::string kind() const = 0;
  virtual nlohmann::json to_json() const = 0;
  static std::unique_ptr<Regressor> from_json(const nlohmann::json& j);
};

// Ordinary least squares via the normal equations; falls back to a ridge
// penalty (lambda = 1e-8) when the system is singular and records that it did.
struct LinearModel : Regressor {
  std::vector<double> coef;  // intercept first, then one weight per feature
  bool ridge_fallback = false;

  double predict(const std::vector<double>& x) const override;
  std::string kind() const override { return "linear"; }
  nlohmann::json to_json() const override;
};

// Linear model over all monomials of degree <= 2 of the input features.
struct Poly2Model : Regressor {
  size_t input_dim = 0;
  LinearModel lin;

  static std::vector<double> expand(const std::vector<double>& x);
  double predict(const std::vector<double>& x) const override;
  std::string kind() const override { return "poly2"; }
  nlohmann::json to_json() const override;
};

// Unweighted k-nearest-neighbour mean in standardized feature space;
// distance ties break toward the lower training-row index.
struct KnnModel : Regressor {
  int k = 4;
  Standardizer scaler;
  std::vector<std::vector<double>> points;  // standardized
  std::vector<double> labels;

  double predict(const std::vector<double>& x) const override;
  // Prediction with training rows `skip` excluded (for leave-one-out scoring).
  double predict_excluding(const std::vector<double>& x, size_t skip) const;
  std::string kind() const override { return "knn4"; }
  nlohmann::json to_json() const override;
};

LinearModel fit_linear(const std::vector<std::vector<double>>& X,
                       const std::vector<double>& y);
Poly2Model fit_poly2(const std::vector<std::vector<double>>& X,
                     const std::vector<double>& y);
KnnModel fit_knn(const std::vector<std::vector<double>>& X,
                 const std::vector<double>& y, int k = 4);

// Dispatcher over kind in {linear, poly2, knn4}.
std::unique_ptr<Regressor> fit_regressor(const std::string& kind,
                                         const std::vector<std::vector<double>>& X,
                                         const std::vector<double>& y);

double r2_score(const std::vector<double>& y_true,
                const std::vector<double>& y_pred);

}  // namespace llql
