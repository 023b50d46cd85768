#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/points.hpp"

namespace npl {

inline constexpr double kDefaultVarianceFloor = 1e-6;

/// Diagonal-covariance Gaussian mixture parameters. Means and variances are
/// stored row-major as K x d.
struct GmmParams {
  std::size_t K = 0;
  std::size_t d = 0;
  std::vector<double> mixing;
  std::vector<double> means;
  std::vector<double> variances;

  GmmParams() = default;
  GmmParams(std::size_t k, std::size_t dim)
      : K(k), d(dim), mixing(k, 1.0 / static_cast<double>(k)), means(k * dim, 0.0), variances(k * dim, 1.0) {}

  double mean(std::size_t k, std::size_t j) const { return means[k * d + j]; }
  double variance(std::size_t k, std::size_t j) const { return variances[k * d + j]; }

  /// Flat layout: [pi_1..pi_K, mu_11..mu_Kd, sigma2_11..sigma2_Kd].
  std::vector<double> pack() const {
    std::vector<double> out;
    out.reserve(K * (1 + 2 * d));
    out.insert(out.end(), mixing.begin(), mixing.end());
    out.insert(out.end(), means.begin(), means.end());
    out.insert(out.end(), variances.begin(), variances.end());
    return out;
  }

  static GmmParams unpack(std::span<const double> theta, std::size_t K, std::size_t d) {
    if (theta.size() != K * (1 + 2 * d)) throw ConfigError("gmm: parameter vector has wrong length");
    GmmParams p;
    p.K = K;
    p.d = d;
    p.mixing.assign(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(K));
    p.means.assign(theta.begin() + static_cast<std::ptrdiff_t>(K),
                   theta.begin() + static_cast<std::ptrdiff_t>(K + K * d));
    p.variances.assign(theta.begin() + static_cast<std::ptrdiff_t>(K + K * d), theta.end());
    return p;
  }

  void validate(double variance_floor = kDefaultVarianceFloor) const {
    if (K == 0 || d == 0) throw ConfigError("gmm: K and d must be >= 1");
    if (mixing.size() != K || means.size() != K * d || variances.size() != K * d) {
      throw ConfigError("gmm: parameter arrays have inconsistent sizes");
    }
    double s = 0.0;
    for (double p : mixing) {
      if (!(p >= 0.0)) throw ConfigError("gmm: mixing weights must be >= 0");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-10) throw ConfigError("gmm: mixing weights must sum to 1");
    for (double m : means) {
      if (!std::isfinite(m)) throw ConfigError("gmm: means must be finite");
    }
    for (double v : variances) {
      if (!(v >= variance_floor) || !std::isfinite(v)) throw ConfigError("gmm: variance below floor or non-finite");
    }
  }
};

namespace detail {

/// Per-component constant part of log(pi_k N(y; mu_k, diag sigma2_k)).
struct GmmLogTerms {
  std::vector<double> offset;   // log pi_k - 0.5 sum_j log(2 pi sigma2_kj)
  std::vector<double> inv_var;  // 1 / sigma2_kj

  explicit GmmLogTerms(const GmmParams& p) : offset(p.K), inv_var(p.K * p.d) {
    for (std::size_t k = 0; k < p.K; ++k) {
      double o = std::log(p.mixing[k]);
      for (std::size_t j = 0; j < p.d; ++j) {
        o -= 0.5 * std::log(2.0 * std::numbers::pi * p.variance(k, j));
        inv_var[k * p.d + j] = 1.0 / p.variance(k, j);
      }
      offset[k] = o;
    }
  }

  /// Fills log_joint[k] and returns log sum_k exp(log_joint[k]).
  double log_joint(const GmmParams& p, std::span<const double> y, std::span<double> out) const {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < p.K; ++k) {
      double q = 0.0;
      for (std::size_t j = 0; j < p.d; ++j) {
        const double z = y[j] - p.means[k * p.d + j];
        q += z * z * inv_var[k * p.d + j];
      }
      out[k] = offset[k] - 0.5 * q;
      mx = std::max(mx, out[k]);
    }
    if (mx == -std::numeric_limits<double>::infinity()) return mx;
    double s = 0.0;
    for (std::size_t k = 0; k < p.K; ++k) s += std::exp(out[k] - mx);
    return mx + std::log(s);
  }
};

}  // namespace detail

/// log sum_k pi_k N(y; mu_k, diag sigma2_k).
inline double gmm_log_density(const GmmParams& p, std::span<const double> y) {
  if (y.size() != p.d) throw ConfigError("gmm: point has wrong dimension");
  const detail::GmmLogTerms terms(p);
  std::vector<double> scratch(p.K);
  return terms.log_joint(p, y, scratch);
}

/// sum_i w_i log f(y_i); zero-weight atoms are skipped entirely.
inline double gmm_weighted_loglik(const GmmParams& p, const WeightedDataset<VectorPoint>& data) {
  const detail::GmmLogTerms terms(p);
  std::vector<double> scratch(p.K);
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = data.weights[i];
    if (w == 0.0) continue;
    if (data.atoms[i].size() != p.d) throw ConfigError("gmm: point has wrong dimension");
    const double lp = terms.log_joint(p, data.atoms[i], scratch);
    if (!std::isfinite(lp)) {
      throw NumericalError("gmm: non-finite log density at atom " + std::to_string(i));
    }
    s += w * lp;
  }
  return s;
}

/// Weighted negative log-likelihood.
inline double gmm_weighted_loss(const GmmParams& p, const WeightedDataset<VectorPoint>& data) {
  return -gmm_weighted_loglik(p, data);
}

struct GmmEmStep {
  GmmParams params;             // after the M-step
  double loglik_before = 0.0;   // weighted log-likelihood of the input parameters
};

/// One weighted EM iteration. Responsibilities are computed in log space;
/// updated variances are clamped to `variance_floor`.
inline GmmEmStep gmm_em_step_with_loglik(const GmmParams& p, const WeightedDataset<VectorPoint>& data,
                                         double variance_floor = kDefaultVarianceFloor) {
  const std::size_t K = p.K, d = p.d, n = data.size();
  const detail::GmmLogTerms terms(p);
  std::vector<double> log_joint(K);
  std::vector<double> wr(n * K, 0.0);  // w_i * r_ik
  std::vector<double> mass(K, 0.0);
  double loglik = 0.0;

  GmmParams next(K, d);
  std::fill(next.means.begin(), next.means.end(), 0.0);
  std::fill(next.variances.begin(), next.variances.end(), 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const double w = data.weights[i];
    if (w == 0.0) continue;
    const auto& y = data.atoms[i];
    if (y.size() != d) throw ConfigError("gmm: point has wrong dimension");
    const double lse = terms.log_joint(p, y, log_joint);
    if (!std::isfinite(lse)) throw NumericalError("gmm: non-finite log density at atom " + std::to_string(i));
    loglik += w * lse;
    for (std::size_t k = 0; k < K; ++k) {
      const double r = w * std::exp(log_joint[k] - lse);
      wr[i * K + k] = r;
      mass[k] += r;
      for (std::size_t j = 0; j < d; ++j) next.means[k * d + j] += r * y[j];
    }
  }

  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    if (!(mass[k] >= 1e-300)) {
      throw DegenerateComponentError(k, "gmm: component " + std::to_string(k + 1) +
                                            " received no responsibility mass");
    }
    total += mass[k];
    for (std::size_t j = 0; j < d; ++j) next.means[k * d + j] /= mass[k];
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (data.weights[i] == 0.0) continue;
    const auto& y = data.atoms[i];
    for (std::size_t k = 0; k < K; ++k) {
      const double r = wr[i * K + k];
      for (std::size_t j = 0; j < d; ++j) {
        const double z = y[j] - next.means[k * d + j];
        next.variances[k * d + j] += r * z * z;
      }
    }
  }
  for (std::size_t k = 0; k < K; ++k) {
    next.mixing[k] = mass[k] / total;
    for (std::size_t j = 0; j < d; ++j) {
      double& v = next.variances[k * d + j];
      v = std::max(v / mass[k], variance_floor);
    }
  }
  return {std::move(next), loglik};
}

inline GmmParams gmm_em_step(const GmmParams& p, const WeightedDataset<VectorPoint>& data,
                             double variance_floor = kDefaultVarianceFloor) {
  return gmm_em_step_with_loglik(p, data, variance_floor).params;
}

/// Model-family adaptor over the free functions above.
class GmmModel {
 public:
  using point_type = VectorPoint;

  struct EmResult {
    std::vector<double> theta;
    double loglik_before;
  };

  GmmModel(std::size_t K, std::size_t d, double variance_floor = kDefaultVarianceFloor)
      : K_(K), d_(d), floor_(variance_floor) {
    if (K < 1 || d < 1) throw ConfigError("gmm: K and d must be >= 1");
    if (!(variance_floor > 0.0)) throw ConfigError("gmm: variance floor must be > 0");
  }

  std::size_t components() const { return K_; }
  std::size_t data_dimension() const { return d_; }
  double variance_floor() const { return floor_; }
  std::size_t dimension() const { return K_ * (1 + 2 * d_); }
  std::string family() const { return "gmm"; }

  std::vector<ParameterBlock> parameter_blocks() const {
    return {{"pi", K_}, {"mu", K_ * d_}, {"sigma2", K_ * d_}};
  }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= K_; ++k) names.push_back("pi_" + std::to_string(k));
    for (const char* block : {"mu_", "sigma2_"}) {
      for (std::size_t k = 1; k <= K_; ++k) {
        for (std::size_t j = 1; j <= d_; ++j) {
          names.push_back(block + std::to_string(k) + (d_ == 1 ? "" : "_" + std::to_string(j)));
        }
      }
    }
    return names;
  }

  GmmParams unpack(std::span<const double> theta) const { return GmmParams::unpack(theta, K_, d_); }

  bool is_feasible(std::span<const double> theta) const {
    if (theta.size() != dimension()) return false;
    try {
      unpack(theta).validate(floor_);
    } catch (const ConfigError&) {
      return false;
    }
    return true;
  }

  /// Renormalises mixing weights and lifts variances to the floor.
  void project(std::vector<double>& theta) const {
    if (theta.size() != dimension()) throw ConfigError("gmm: parameter vector has wrong length");
    double s = 0.0;
    for (std::size_t k = 0; k < K_; ++k) {
      theta[k] = std::max(theta[k], 0.0);
      s += theta[k];
    }
    if (!(s > 0.0)) throw ConfigError("gmm: mixing weights are all zero");
    for (std::size_t k = 0; k < K_; ++k) theta[k] /= s;
    for (std::size_t i = K_ + K_ * d_; i < theta.size(); ++i) theta[i] = std::max(theta[i], floor_);
  }

  double weighted_loss(std::span<const double> theta, const WeightedDataset<VectorPoint>& data) const {
    return gmm_weighted_loss(unpack(theta), data);
  }

  EmResult em_step_flat(std::span<const double> theta, const WeightedDataset<VectorPoint>& data) const {
    auto step = gmm_em_step_with_loglik(unpack(theta), data, floor_);
    return {step.params.pack(), step.loglik_before};
  }

  double log_predictive_density(std::span<const double> theta, const VectorPoint& y) const {
    return gmm_log_density(unpack(theta), y);
  }

 private:
  std::size_t K_;
  std::size_t d_;
  double floor_;
};

}  // namespace npl
