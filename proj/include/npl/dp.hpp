#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "npl/centering.hpp"
#include "npl/error.hpp"
#include "npl/random.hpp"

namespace npl {

/// Truncate the Dirichlet process at a fixed number of pseudo-samples.
struct FixedTruncation {
  std::size_t T = 100;
};

/// Stick-breaking until the unallocated mass falls below epsilon.
struct AdaptiveTruncation {
  double epsilon = 1e-4;
};

using Truncation = std::variant<FixedTruncation, AdaptiveTruncation>;

struct DpConfig {
  double alpha = 0.0;
  Truncation truncation = FixedTruncation{};

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("dp.alpha must be finite and >= 0");
    if (alpha == 0.0) return;
    if (const auto* f = std::get_if<FixedTruncation>(&truncation)) {
      if (f->T < 1) throw ConfigError("dp.truncation.T must be >= 1");
    } else {
      const double eps = std::get<AdaptiveTruncation>(truncation).epsilon;
      if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("dp.truncation.epsilon must lie in (0,1)");
    }
  }

  std::string describe() const {
    std::string s = "alpha=" + std::to_string(alpha);
    if (alpha == 0.0) return s + " (bayesian bootstrap)";
    if (const auto* f = std::get_if<FixedTruncation>(&truncation)) return s + ", T=" + std::to_string(f->T);
    return s + ", epsilon=" + std::to_string(std::get<AdaptiveTruncation>(truncation).epsilon);
  }
};

/// One draw F ~ DP posterior, represented by weighted atoms.
/// Observed atoms come first, pseudo-samples after them.
template <class Point>
struct WeightedDataset {
  std::vector<Point> atoms;
  std::vector<double> weights;
  std::size_t n_observed = 0;

  std::size_t size() const { return atoms.size(); }
  std::size_t n_pseudo() const { return atoms.size() - n_observed; }

  double total_weight() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  void validate(double tol = 1e-12) const {
    if (atoms.size() != weights.size()) throw ConfigError("weighted dataset: atoms/weights length mismatch");
    if (n_observed > atoms.size()) throw ConfigError("weighted dataset: n_observed exceeds atom count");
    for (double w : weights) {
      if (!(w >= 0.0)) throw ConfigError("weighted dataset: negative or NaN weight");
    }
    if (std::abs(total_weight() - 1.0) > tol) throw ConfigError("weighted dataset: weights do not sum to 1");
  }
};

/// Dirichlet(1,...,1, alpha/T,...,alpha/T) over n observed and T pseudo atoms.
inline std::vector<double> draw_dirichlet_weights(std::size_t n_observed, double alpha, std::size_t T,
                                                  Rng& rng) {
  if (n_observed < 1) throw ConfigError("draw_dirichlet_weights: n_observed must be >= 1");
  if (!(alpha >= 0.0)) throw ConfigError("draw_dirichlet_weights: alpha must be >= 0");
  if (alpha > 0.0 && T == 0) throw ConfigError("draw_dirichlet_weights: alpha > 0 requires T >= 1");
  if (alpha == 0.0 && T != 0) throw ConfigError("draw_dirichlet_weights: alpha = 0 requires T = 0");
  std::vector<double> conc(n_observed + T, 1.0);
  if (T > 0) std::fill(conc.begin() + static_cast<std::ptrdiff_t>(n_observed), conc.end(), alpha / static_cast<double>(T));
  return dirichlet(conc, rng);
}

struct GemDraw {
  std::vector<double> weights;  // renormalised
  double discarded_mass = 0.0;  // leftover before renormalisation, < epsilon
};

/// GEM(mass) stick-breaking, stopped once the remaining stick is < epsilon.
inline GemDraw draw_gem_weights_adaptive(double mass, double epsilon, Rng& rng) {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw ConfigError("draw_gem_weights_adaptive: mass must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("draw_gem_weights_adaptive: epsilon must lie in (0,1)");
  GemDraw out;
  // Track log of the remaining stick so that tiny leftovers stay accurate.
  double log_remaining = 0.0;
  const double log_eps = std::log(epsilon);
  while (log_remaining >= log_eps) {
    const double v = beta_one(mass, rng);
    out.weights.push_back(v * std::exp(log_remaining));
    log_remaining += std::log1p(-v);
  }
  out.discarded_mass = std::exp(log_remaining);
  const double total = std::accumulate(out.weights.begin(), out.weights.end(), 0.0);
  for (double& w : out.weights) w /= total;
  return out;
}

/// Draws one weighted dataset from the DP posterior DP(alpha + n, G_n),
/// G_n = (alpha F_pi + sum_i delta_{y_i}) / (alpha + n).
///
/// alpha = 0 gives the Bayesian bootstrap and never touches f_pi. With a
/// fixed truncation, T pseudo-samples are drawn from f_pi and share
/// Dirichlet mass alpha. With adaptive truncation every stick of a
/// GEM(alpha + n) draw is assigned to an atom drawn from G_n; sticks landing
/// on the same observed point are merged.
template <class Point>
WeightedDataset<Point> draw_dp_posterior_dataset(const std::vector<Point>& data,
                                                 const CenteringMeasure<Point>& f_pi, const DpConfig& cfg,
                                                 Rng& rng) {
  if (data.empty()) throw ConfigError("draw_dp_posterior_dataset: data must be non-empty");
  cfg.validate();
  const std::size_t n = data.size();
  WeightedDataset<Point> out;
  out.n_observed = n;
  out.atoms = data;

  if (cfg.alpha == 0.0) {
    out.weights = draw_dirichlet_weights(n, 0.0, 0, rng);
    return out;
  }

  if (const auto* fixed = std::get_if<FixedTruncation>(&cfg.truncation)) {
    auto pseudo = f_pi.draw_n(fixed->T, rng);
    out.atoms.insert(out.atoms.end(), std::make_move_iterator(pseudo.begin()),
                     std::make_move_iterator(pseudo.end()));
    out.weights = draw_dirichlet_weights(n, cfg.alpha, fixed->T, rng);
    return out;
  }

  const double eps = std::get<AdaptiveTruncation>(cfg.truncation).epsilon;
  const double mass = cfg.alpha + static_cast<double>(n);
  const GemDraw gem = draw_gem_weights_adaptive(mass, eps, rng);
  const double p_observed = static_cast<double>(n) / mass;
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  out.weights.assign(n, 0.0);
  for (double w : gem.weights) {
    if (uniform01(rng) < p_observed) {
      out.weights[pick(rng)] += w;
    } else {
      out.atoms.push_back(f_pi.draw(rng));
      out.weights.push_back(w);
    }
  }
  return out;
}

/// Pseudo-atoms only: a truncated draw from the prior DP(alpha, F_pi).
template <class Point>
WeightedDataset<Point> draw_dp_prior_dataset(const CenteringMeasure<Point>& f_pi, double alpha,
                                             double epsilon, Rng& rng) {
  const GemDraw gem = draw_gem_weights_adaptive(alpha, epsilon, rng);
  WeightedDataset<Point> out;
  out.atoms = f_pi.draw_n(gem.weights.size(), rng);
  out.weights = gem.weights;
  return out;
}

/// Concentration giving a prior variance `target_var` of the mean functional
/// when the centering measure has variance `var_under_f_pi`; clamped at 0.
inline double alpha_from_mean_variance(double target_var, double var_under_f_pi) {
  if (!(target_var > 0.0) || !(var_under_f_pi > 0.0)) {
    throw ConfigError("alpha_from_mean_variance: variances must be positive");
  }
  return std::max(0.0, var_under_f_pi / target_var - 1.0);
}

}  // namespace npl
