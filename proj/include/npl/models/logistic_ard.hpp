#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/points.hpp"

namespace npl {

/// Student-t(2a, 0, b/a) log-prior penalty, scaled by gamma.
struct ArdPenalty {
  double a = 1.0;
  double b = 1.0;
  double gamma = 0.0;

  double squared_scale() const { return b / a; }

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("ard penalty: a and b must be > 0");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("ard penalty: gamma must be >= 0");
  }

  double value(std::span<const double> beta) const {
    if (gamma == 0.0) return 0.0;
    double s = 0.0;
    for (double bj : beta) s += std::log1p(bj * bj / (2.0 * b));
    return gamma * (2.0 * a + 1.0) / 2.0 * s;
  }

  double derivative(double bj) const { return gamma * (2.0 * a + 1.0) / (2.0 * b + bj * bj) * bj; }
};

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Bernoulli(sigmoid(beta' x + beta0)) likelihood with ARD penalty.
/// Parameter layout: [beta_1..beta_d, beta0].
class LogisticArdModel {
 public:
  using point_type = LabeledPoint;

  LogisticArdModel(std::size_t d, ArdPenalty penalty) : d_(d), pen_(penalty) {
    if (d < 1) throw ConfigError("logistic: need at least one covariate");
    pen_.validate();
  }

  /// gamma = 1 / n_observed, the default scaling.
  static LogisticArdModel with_default_gamma(std::size_t d, double a, double b, std::size_t n_observed) {
    return LogisticArdModel(d, ArdPenalty{a, b, 1.0 / static_cast<double>(n_observed)});
  }

  std::size_t covariates() const { return d_; }
  const ArdPenalty& penalty() const { return pen_; }
  std::size_t dimension() const { return d_ + 1; }
  std::string family() const { return "logistic"; }
  std::vector<ParameterBlock> parameter_blocks() const { return {{"beta", d_}, {"intercept", 1}}; }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    for (std::size_t j = 1; j <= d_; ++j) names.push_back("beta_" + std::to_string(j));
    names.push_back("intercept");
    return names;
  }

  bool is_feasible(std::span<const double> theta) const {
    if (theta.size() != dimension()) return false;
    for (double t : theta) {
      if (!std::isfinite(t)) return false;
    }
    return true;
  }

  double linear_predictor(std::span<const double> theta, const LabeledPoint& p) const {
    if (p.x.size() != d_) throw ConfigError("logistic: point has wrong covariate count");
    double z = theta[d_];
    for (std::size_t j = 0; j < d_; ++j) z += theta[j] * p.x[j];
    return z;
  }

  /// P(y = 1 | x).
  double probability(std::span<const double> theta, const std::vector<double>& x) const {
    return sigmoid(linear_predictor(theta, LabeledPoint{0.0, x}));
  }

  double weighted_loss(std::span<const double> theta, const WeightedDataset<LabeledPoint>& data) const {
    double s = 0.0, total_w = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double w = data.weights[i];
      if (w == 0.0) continue;
      const auto& p = data.atoms[i];
      const double z = linear_predictor(theta, p);
      // -(y log eta + (1-y) log(1-eta)) = softplus(z) - y z
      s += w * (softplus(z) - p.y * z);
      total_w += w;
    }
    s += total_w * pen_.value(theta.first(d_));
    if (!std::isfinite(s)) throw NumericalError("logistic: non-finite weighted loss");
    return s;
  }

  std::vector<double> point_gradient(std::span<const double> theta, const LabeledPoint& p) const {
    std::vector<double> g(d_ + 1);
    const double resid = sigmoid(linear_predictor(theta, p)) - p.y;
    for (std::size_t j = 0; j < d_; ++j) g[j] = resid * p.x[j] + pen_.derivative(theta[j]);
    g[d_] = resid;
    return g;
  }

  std::vector<double> weighted_gradient(std::span<const double> theta,
                                        const WeightedDataset<LabeledPoint>& data) const {
    std::vector<double> g(d_ + 1, 0.0);
    double total_w = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double w = data.weights[i];
      if (w == 0.0) continue;
      const auto& p = data.atoms[i];
      const double r = w * (sigmoid(linear_predictor(theta, p)) - p.y);
      for (std::size_t j = 0; j < d_; ++j) g[j] += r * p.x[j];
      g[d_] += r;
      total_w += w;
    }
    for (std::size_t j = 0; j < d_; ++j) g[j] += total_w * pen_.derivative(theta[j]);
    return g;
  }

  /// Bernoulli log-mass of the label.
  double log_predictive_density(std::span<const double> theta, const LabeledPoint& p) const {
    const double z = linear_predictor(theta, p);
    return p.y * -softplus(-z) + (1.0 - p.y) * -softplus(z);
  }

 private:
  std::size_t d_;
  ArdPenalty pen_;
};

}  // namespace npl
