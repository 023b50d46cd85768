#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "npl/error.hpp"
#include "npl/models/gmm.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/points.hpp"
#include "npl/random.hpp"

namespace npl::synthetic {

/// The three-component, one-dimensional toy mixture used throughout the tests.
inline GmmParams toy_gmm_truth() {
  GmmParams p(3, 1);
  p.mixing = {0.1, 0.3, 0.6};
  p.means = {0.0, 2.0, 4.0};
  p.variances = {1.0, 1.0, 1.0};
  return p;
}

inline std::vector<VectorPoint> sample_gmm(const GmmParams& p, std::size_t n, Rng& rng) {
  std::discrete_distribution<std::size_t> component(p.mixing.begin(), p.mixing.end());
  std::vector<VectorPoint> out(n, VectorPoint(p.d));
  for (auto& y : out) {
    const std::size_t k = component(rng);
    for (std::size_t j = 0; j < p.d; ++j) y[j] = p.mean(k, j) + std::sqrt(p.variance(k, j)) * standard_normal(rng);
  }
  return out;
}

/// Sparse coefficient vector: 50 covariates, five non-zero (1-based indices
/// 10, 14, 24, 31, 37).
inline constexpr std::array<std::size_t, 5> kGenotypeNonzero = {10, 14, 24, 31, 37};
inline constexpr std::array<double, 5> kGenotypeBeta = {-0.2538, 0.4578, -0.1873, -0.1498, 0.0996};

inline std::vector<double> genotype_beta(std::size_t d = 50) {
  std::vector<double> beta(d, 0.0);
  for (std::size_t k = 0; k < kGenotypeNonzero.size(); ++k) {
    if (kGenotypeNonzero[k] <= d) beta[kGenotypeNonzero[k] - 1] = kGenotypeBeta[k];
  }
  return beta;
}

/// Rescales every covariate to mean 0 and standard deviation 1 (population form).
inline void standardize(std::vector<LabeledPoint>& data) {
  if (data.empty()) return;
  const std::size_t d = data.front().x.size();
  const double n = static_cast<double>(data.size());
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& p : data) mean += p.x[j];
    mean /= n;
    double var = 0.0;
    for (const auto& p : data) var += (p.x[j] - mean) * (p.x[j] - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0)) throw DataError("standardize: covariate " + std::to_string(j + 1) + " is constant");
    for (auto& p : data) p.x[j] = (p.x[j] - mean) / sd;
  }
}

/// Block-correlated covariates (AR(1) with coefficient `rho` inside blocks of
/// `block` columns), standardised, with labels y ~ Bernoulli(sigmoid(beta' x)).
inline std::vector<LabeledPoint> genotype_like(std::size_t n, Rng& rng, std::size_t d = 50, std::size_t block = 10,
                                               double rho = 0.8) {
  const auto beta = genotype_beta(d);
  std::vector<LabeledPoint> out(n);
  const double innovation = std::sqrt(1.0 - rho * rho);
  for (auto& p : out) {
    p.x.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double e = standard_normal(rng);
      p.x[j] = (j % block == 0) ? e : rho * p.x[j - 1] + innovation * e;
    }
  }
  standardize(out);
  for (auto& p : out) {
    double z = 0.0;
    for (std::size_t j = 0; j < d; ++j) z += beta[j] * p.x[j];
    p.y = uniform01(rng) < sigmoid(z) ? 1.0 : 0.0;
  }
  return out;
}

}  // namespace npl::synthetic
