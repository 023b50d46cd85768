#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "npl/error.hpp"
#include "npl/evaluate.hpp"
#include "npl/model.hpp"
#include "npl/models/gmm.hpp"
#include "npl/random.hpp"

namespace npl {

template <class P>
concept ParameterDensity = requires(const P& p, const std::vector<double>& theta) {
  { p.log_density(theta) } -> std::convertible_to<double>;
};

template <class Q>
concept ParameterProposal = ParameterDensity<Q> && requires(const Q& q, Rng& rng) {
  { q.draw(rng) } -> std::convertible_to<std::vector<double>>;
};

struct SnisResult {
  double mean_lppd = 0.0;
  double ess = 0.0;
  double weight_sum = 0.0;  // sum of the self-normalised weights
};

/// Self-normalised importance sampling estimate of the mean LPPD.
///
/// theta_b ~ q, log w_b = log f(y_1:n | theta_b) + log pi(theta_b) - log q(theta_b).
/// Everything is accumulated in log space in one pass, so memory does not
/// grow with B.
template <LossModel M, ParameterDensity Prior, ParameterProposal Proposal>
SnisResult snis_mean_lppd(const M& model, const Prior& prior, const Proposal& proposal,
                          const std::vector<typename M::point_type>& data,
                          const std::vector<typename M::point_type>& test, std::size_t B, Rng& rng) {
  if (B < 1) throw ConfigError("snis: B must be >= 1");
  if (test.empty()) throw ConfigError("snis: empty test set");
  LogSumExp log_w_sum, log_w2_sum;
  std::vector<LogSumExp> numer(test.size());
  std::vector<double> log_w_all;  // only kept to report the normalised weight sum
  log_w_all.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    const std::vector<double> theta = proposal.draw(rng);
    double log_w = prior.log_density(theta) - proposal.log_density(theta);
    if (std::isfinite(log_w)) {
      for (const auto& y : data) log_w += model.log_predictive_density(theta, y);
    }
    if (std::isnan(log_w)) log_w = -std::numeric_limits<double>::infinity();
    log_w_all.push_back(log_w);
    if (log_w == -std::numeric_limits<double>::infinity()) continue;
    log_w_sum.add(log_w);
    log_w2_sum.add(2.0 * log_w);
    for (std::size_t i = 0; i < test.size(); ++i) numer[i].add(log_w + model.log_predictive_density(theta, test[i]));
  }
  const double lz = log_w_sum.value();
  if (!std::isfinite(lz)) throw NumericalError("snis: every importance weight underflowed");
  SnisResult r;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double lp = numer[i].value() - lz;
    if (!std::isfinite(lp)) throw NumericalError("snis: predictive density underflows at test point " + std::to_string(i));
    r.mean_lppd += lp;
  }
  r.mean_lppd /= static_cast<double>(test.size());
  r.ess = std::exp(2.0 * lz - log_w2_sum.value());
  for (double lw : log_w_all) r.weight_sum += std::exp(lw - lz);
  return r;
}

/// Scalar normal density over a one-parameter model.
struct NormalParameterDensity {
  double mean = 0.0;
  double variance = 1.0;

  double log_density(const std::vector<double>& theta) const {
    const double z = theta[0] - mean;
    return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * z * z / variance;
  }
  std::vector<double> draw(Rng& rng) const { return {mean + std::sqrt(variance) * standard_normal(rng)}; }
};

/// Independent density over flat GMM parameters:
/// pi ~ Dir(c,...,c), mu_kj ~ N(m, v), sigma_kj ~ logNormal(0, s2).
/// Densities are taken w.r.t. (pi_1..pi_{K-1}, mu, sigma), so a prior and
/// a proposal of this form share coordinates and Jacobians cancel.
struct GmmParameterDensity {
  std::size_t K = 3;
  std::size_t d = 1;
  double dirichlet_concentration = 1.0;
  double mu_mean = 0.0;
  double mu_variance = 1.0;
  double log_sigma_variance = 1.0;

  double log_density(const std::vector<double>& theta) const {
    const auto p = GmmParams::unpack(theta, K, d);
    const double c = dirichlet_concentration;
    double lp = std::lgamma(c * static_cast<double>(K)) - static_cast<double>(K) * std::lgamma(c);
    for (double pk : p.mixing) lp += (c - 1.0) * std::log(pk);
    for (double m : p.means) {
      const double z = m - mu_mean;
      lp += -0.5 * std::log(2.0 * std::numbers::pi * mu_variance) - 0.5 * z * z / mu_variance;
    }
    for (double v : p.variances) {
      const double log_sigma = 0.5 * std::log(v);
      lp += -0.5 * std::log(2.0 * std::numbers::pi * log_sigma_variance) - log_sigma -
            0.5 * log_sigma * log_sigma / log_sigma_variance;
    }
    return lp;
  }

  std::vector<double> draw(Rng& rng) const {
    GmmParams p(K, d);
    const std::vector<double> conc(K, dirichlet_concentration);
    p.mixing = dirichlet(conc, rng);
    for (double& m : p.means) m = mu_mean + std::sqrt(mu_variance) * standard_normal(rng);
    for (double& v : p.variances) {
      const double sigma = std::exp(std::sqrt(log_sigma_variance) * standard_normal(rng));
      v = sigma * sigma;
    }
    return p.pack();
  }
};

}  // namespace npl
