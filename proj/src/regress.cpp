#include "llql/regress.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "llql/error.hpp"

namespace llql {

std::string double_to_string(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double double_from_string(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw ModelError("malformed number '" + s + "' in model file");
  return v;
}

namespace {

nlohmann::json doubles_to_json(const std::vector<double>& xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(double_to_string(x));
  return a;
}

std::vector<double> doubles_from_json(const nlohmann::json& a) {
  if (!a.is_array()) throw ModelError("expected an array of numbers");
  std::vector<double> out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(double_from_string(x.get<std::string>()));
  return out;
}

// Solves A x = b in place; A is n x n row major.  Returns false when a pivot
// vanishes.
bool solve_gauss(std::vector<double> A, std::vector<double> b, size_t n,
                 std::vector<double>& x) {
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r * n + col]) > std::fabs(A[piv * n + col])) piv = r;
    if (std::fabs(A[piv * n + col]) < 1e-12) return false;
    if (piv != col) {
      for (size_t c = 0; c < n; ++c) std::swap(A[col * n + c], A[piv * n + c]);
      std::swap(b[col], b[piv]);
    }
    for (size_t r = col + 1; r < n; ++r) {
      double f = A[r * n + col] / A[col * n + col];
      if (f == 0) continue;
      for (size_t c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (size_t c = ri + 1; c < n; ++c) s -= A[ri * n + c] * x[c];
    x[ri] = s / A[ri * n + ri];
  }
  return true;
}

}  // namespace

void Standardizer::fit(const std::vector<std::vector<double>>& X) {
  if (X.empty()) throw ModelError("cannot standardize an empty training set");
  size_t d = X[0].size();
  mean.assign(d, 0.0);
  stdev.assign(d, 0.0);
  for (const auto& row : X)
    for (size_t j = 0; j < d; ++j) mean[j] += row[j];
  for (size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(X.size());
  for (const auto& row : X)
    for (size_t j = 0; j < d; ++j) {
      double dx = row[j] - mean[j];
      stdev[j] += dx * dx;
    }
  for (size_t j = 0; j < d; ++j) {
    stdev[j] = std::sqrt(stdev[j] / static_cast<double>(X.size()));
    if (stdev[j] < 1e-12) stdev[j] = 1.0;  // constant feature
  }
}

std::vector<double> Standardizer::transform(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) / stdev[j];
  return out;
}

double LinearModel::predict(const std::vector<double>& x) const {
  double s = coef.empty() ? 0.0 : coef[0];
  for (size_t j = 0; j < x.size() && j + 1 < coef.size(); ++j)
    s += coef[j + 1] * x[j];
  return s;
}

nlohmann::json LinearModel::to_json() const {
  return {{"kind", "linear"},
          {"coef", doubles_to_json(coef)},
          {"ridge_fallback", ridge_fallback}};
}

std::vector<double> Poly2Model::expand(const std::vector<double>& x) {
  std::vector<double> out(x);
  for (size_t i = 0; i < x.size(); ++i)
    for (size_t j = i; j < x.size(); ++j) out.push_back(x[i] * x[j]);
  return out;
}

double Poly2Model::predict(const std::vector<double>& x) const {
  return lin.predict(expand(x));
}

nlohmann::json Poly2Model::to_json() const {
  return {{"kind", "poly2"},
          {"input_dim", input_dim},
          {"coef", doubles_to_json(lin.coef)},
          {"ridge_fallback", lin.ridge_fallback}};
}

double KnnModel::predict(const std::vector<double>& x) const {
  return predict_excluding(x, points.size());
}

double KnnModel::predict_excluding(const std::vector<double>& x,
                                   size_t skip) const {
  if (points.empty()) throw ModelError("knn model has no training points");
  std::vector<double> q = scaler.transform(x);
  std::vector<std::pair<double, size_t>> dist;
  dist.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    if (i == skip) continue;
    double d2 = 0;
    for (size_t j = 0; j < q.size(); ++j) {
      double dx = points[i][j] - q[j];
      d2 += dx * dx;
    }
    dist.emplace_back(d2, i);
  }
  size_t kk = std::min<size_t>(static_cast<size_t>(k), dist.size());
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
  double s = 0;
  for (size_t i = 0; i < kk; ++i) s += labels[dist[i].second];
  return s / static_cast<double>(kk);
}

nlohmann::json KnnModel::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : points) pts.push_back(doubles_to_json(p));
  return {{"kind", "knn4"},
          {"k", k},
          {"mean", doubles_to_json(scaler.mean)},
          {"stdev", doubles_to_json(scaler.stdev)},
          {"points", pts},
          {"labels", doubles_to_json(labels)}};
}

std::unique_ptr<Regressor> Regressor::from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "linear") {
    auto m = std::make_unique<LinearModel>();
    m->coef = doubles_from_json(j.at("coef"));
    m->ridge_fallback = j.value("ridge_fallback", false);
    return m;
  }
  if (kind == "poly2") {
    auto m = std::make_unique<Poly2Model>();
    m->input_dim = j.at("input_dim").get<size_t>();
    m->lin.coef = doubles_from_json(j.at("coef"));
    m->lin.ridge_fallback = j.value("ridge_fallback", false);
    return m;
  }
  if (kind == "knn4") {
    auto m = std::make_unique<KnnModel>();
    m->k = j.at("k").get<int>();
    m->scaler.mean = doubles_from_json(j.at("mean"));
    m->scaler.stdev = doubles_from_json(j.at("stdev"));
    for (const auto& p : j.at("points")) m->points.push_back(doubles_from_json(p));
    m->labels = doubles_from_json(j.at("labels"));
    return m;
  }
  throw ModelError("unknown regressor kind '" + kind + "'");
}

LinearModel fit_linear(const std::vector<std::vector<double>>& X,
                       const std::vector<double>& y) {
  if (X.empty() || X.size() != y.size())
    throw ModelError("regression needs matching, nonempty X and y");
  size_t d = X[0].size() + 1;  // intercept column
  std::vector<double> XtX(d * d, 0.0), Xty(d, 0.0), row(d);
  for (size_t i = 0; i < X.size(); ++i) {
    row[0] = 1.0;
    for (size_t j = 1; j < d; ++j) row[j] = X[i][j - 1];
    for (size_t a = 0; a < d; ++a) {
      Xty[a] += row[a] * y[i];
      for (size_t b = 0; b < d; ++b) XtX[a * d + b] += row[a] * row[b];
    }
  }
  LinearModel m;
  if (!solve_gauss(XtX, Xty, d, m.coef)) {
    for (size_t a = 0; a < d; ++a) XtX[a * d + a] += 1e-8;
    m.ridge_fallback = true;
    if (!solve_gauss(XtX, Xty, d, m.coef))
      throw ModelError("normal equations are singular even with ridge penalty");
  }
  return m;
}

Poly2Model fit_poly2(const std::vector<std::vector<double>>& X,
                     const std::vector<double>& y) {
  if (X.empty()) throw ModelError("regression needs a nonempty training set");
  Poly2Model m;
  m.input_dim = X[0].size();
  std::vector<std::vector<double>> Xe;
  Xe.reserve(X.size());
  for (const auto& x : X) Xe.push_back(Poly2Model::expand(x));
  m.lin = fit_linear(Xe, y);
  return m;
}

KnnModel fit_knn(const std::vector<std::vector<double>>& X,
                 const std::vector<double>& y, int k) {
  if (X.empty() || X.size() != y.size())
    throw ModelError("regression needs matching, nonempty X and y");
  KnnModel m;
  m.k = k;
  m.scaler.fit(X);
  m.points.reserve(X.size());
  for (const auto& x : X) m.points.push_back(m.scaler.transform(x));
  m.labels = y;
  return m;
}

std::unique_ptr<Regressor> fit_regressor(const std::string& kind,
                                         const std::vector<std::vector<double>>& X,
                                         const std::vector<double>& y) {
  if (kind == "linear") return std::make_unique<LinearModel>(fit_linear(X, y));
  if (kind == "poly2") return std::make_unique<Poly2Model>(fit_poly2(X, y));
  if (kind == "knn4") return std::make_unique<KnnModel>(fit_knn(X, y, 4));
  throw UsageError("unknown regressor kind '" + kind +
                   "' (want linear, poly2 or knn4)");
}

double r2_score(const std::vector<double>& y_true,
                const std::vector<double>& y_pred) {
  if (y_true.size() != y_pred.size() || y_true.empty())
    throw ModelError("r2_score needs matching, nonempty vectors");
  double mean = 0;
  for (double v : y_true) mean += v;
  mean /= static_cast<double>(y_true.size());
  double ss_res = 0, ss_tot = 0;
  for (size_t i = 0; i < y_true.size(); ++i) {
    double e = y_true[i] - y_pred[i];
    double t = y_true[i] - mean;
    ss_res += e * e;
    ss_tot += t * t;
  }
  if (ss_tot == 0) return ss_res == 0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace llql
