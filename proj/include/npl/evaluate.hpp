#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/sampler.hpp"

namespace npl {

/// Running log-sum-exp that never overflows.
class LogSumExp {
 public:
  void add(double v) {
    if (v == -std::numeric_limits<double>::infinity()) return;
    if (v > max_) {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    } else {
      sum_ += std::exp(v - max_);
    }
  }
  double value() const {
    if (sum_ == 0.0) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

inline double log_sum_exp(std::span<const double> v) {
  LogSumExp acc;
  for (double x : v) acc.add(x);
  return acc.value();
}

struct PredictiveReport {
  double mean_lppd = 0.0;
  double mse = 0.0;
  double accuracy_percent = 0.0;
  std::size_t n_test = 0;
};

/// (1/n_test) sum_i log[(1/B) sum_b f(y_i | theta_b)].
template <LossModel M>
double mean_lppd(const M& model, const PosteriorSamples& samples,
                 const std::vector<typename M::point_type>& test) {
  const std::size_t B = samples.rows();
  if (B == 0) throw ConfigError("mean_lppd: no posterior samples");
  if (test.empty()) throw ConfigError("mean_lppd: empty test set");
  if (samples.dimension() != model.dimension()) throw ConfigError("mean_lppd: sample width does not match model");
  const double log_b = std::log(static_cast<double>(B));
  double total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    LogSumExp acc;
    for (std::size_t b = 0; b < B; ++b) acc.add(model.log_predictive_density(samples.row(b), test[i]));
    const double lp = acc.value() - log_b;
    if (!std::isfinite(lp)) throw NumericalError("mean_lppd: predictive density underflows at test point " + std::to_string(i));
    total += lp;
  }
  return total / static_cast<double>(test.size());
}

/// Posterior-predictive P(y = 1 | x) averaged over samples.
inline std::vector<double> predictive_probabilities(const LogisticArdModel& model, const PosteriorSamples& samples,
                                                    const std::vector<LabeledPoint>& test) {
  const std::size_t B = samples.rows();
  if (B == 0) throw ConfigError("predictive_probabilities: no posterior samples");
  std::vector<double> p(test.size(), 0.0);
  for (std::size_t i = 0; i < test.size(); ++i) {
    for (std::size_t b = 0; b < B; ++b) p[i] += model.probability(samples.row(b), test[i].x);
    p[i] /= static_cast<double>(B);
  }
  return p;
}

struct MseAccuracy {
  double mse = 0.0;
  double accuracy_percent = 0.0;
};

/// MSE of the predictive probability against the label, and percentage of
/// labels matched by thresholding that probability at 0.5.
inline MseAccuracy mse_and_accuracy(const LogisticArdModel& model, const PosteriorSamples& samples,
                                    const std::vector<LabeledPoint>& test) {
  if (test.empty()) throw ConfigError("mse_and_accuracy: empty test set");
  const auto p = predictive_probabilities(model, samples, test);
  double sq = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double y = test[i].y;
    if (y != 0.0 && y != 1.0) throw DataError("mse_and_accuracy: label at test point " + std::to_string(i) + " is not 0/1");
    sq += (p[i] - y) * (p[i] - y);
    const double yhat = p[i] > 0.5 ? 1.0 : 0.0;
    if (yhat == y) ++hits;
  }
  const double n = static_cast<double>(test.size());
  return {sq / n, 100.0 * static_cast<double>(hits) / n};
}

inline std::vector<double> posterior_mean(const PosteriorSamples& samples) {
  std::vector<double> m(samples.dimension(), 0.0);
  const std::size_t B = samples.rows();
  if (B == 0) throw ConfigError("posterior_mean: no posterior samples");
  for (std::size_t b = 0; b < B; ++b) {
    for (std::size_t j = 0; j < m.size(); ++j) m[j] += samples.at(b, j);
  }
  for (double& v : m) v /= static_cast<double>(B);
  return m;
}

/// Percentage of the first `coefficient_count` coordinates whose posterior
/// mean has absolute value below epsilon.
inline double sparsity_fraction(const PosteriorSamples& samples, std::size_t coefficient_count, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("sparsity_fraction: epsilon must be > 0");
  if (coefficient_count == 0 || coefficient_count > samples.dimension()) {
    throw ConfigError("sparsity_fraction: coefficient block out of range");
  }
  const auto m = posterior_mean(samples);
  std::size_t small = 0;
  for (std::size_t j = 0; j < coefficient_count; ++j) small += std::abs(m[j]) < epsilon ? 1 : 0;
  return 100.0 * static_cast<double>(small) / static_cast<double>(coefficient_count);
}

inline double sparsity_fraction(const LogisticArdModel& model, const PosteriorSamples& samples, double epsilon) {
  return sparsity_fraction(samples, model.covariates(), epsilon);
}

struct CoordinateSummary {
  double mean = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

/// 1-based nearest rank ceil(x), robust to x landing a few ulps above an integer.
inline std::size_t nearest_rank(double x, std::size_t n) {
  const double r = std::ceil(x - 1e-9 * std::max(1.0, x));
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(r, 1.0)), 1, n);
}

/// Mean, median and central interval of mass q from order statistics:
/// lower at rank ceil(B(1-q)/2), upper at ceil(B(1+q)/2), median at ceil(B/2).
inline CoordinateSummary summarize(std::vector<double> values, double interval_mass) {
  const std::size_t B = values.size();
  if (B < 2) throw ConfigError("posterior_summary: needs at least two samples");
  if (!(interval_mass > 0.0 && interval_mass < 1.0)) throw ConfigError("posterior_summary: mass must lie in (0,1)");
  CoordinateSummary s;
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(B);
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(B);
  s.median = values[nearest_rank(n * 0.5, B) - 1];
  s.lower = values[nearest_rank(n * (1.0 - interval_mass) / 2.0, B) - 1];
  s.upper = values[nearest_rank(n * (1.0 + interval_mass) / 2.0, B) - 1];
  return s;
}

inline std::vector<CoordinateSummary> posterior_summary(const PosteriorSamples& samples, double interval_mass) {
  std::vector<CoordinateSummary> out;
  out.reserve(samples.dimension());
  for (std::size_t j = 0; j < samples.dimension(); ++j) out.push_back(summarize(samples.column(j), interval_mass));
  return out;
}

}  // namespace npl
