#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npl/error.hpp"
#include "npl/points.hpp"
#include "npl/random.hpp"

namespace npl {

/// The base measure of the Dirichlet-process prior, seen as a sampler.
///
/// Concrete measures are built with the factory functions below
/// (parametric, empirical, or products of component measures). The object
/// is immutable and can be shared between threads; all randomness comes
/// from the stream passed to draw().
template <class Point>
class CenteringMeasure {
 public:
  using Sampler = std::function<Point(Rng&)>;
  using LogDensity = std::function<double(const Point&)>;

  CenteringMeasure(std::string name, Sampler sampler, LogDensity log_density = {})
      : name_(std::move(name)), sampler_(std::move(sampler)), log_density_(std::move(log_density)) {
    if (!sampler_) throw ConfigError("centering measure '" + name_ + "' has no sampler");
  }

  Point draw(Rng& rng) const { return sampler_(rng); }

  std::vector<Point> draw_n(std::size_t count, Rng& rng) const {
    std::vector<Point> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(sampler_(rng));
    return out;
  }

  bool has_log_density() const { return static_cast<bool>(log_density_); }

  double log_density(const Point& p) const {
    if (!log_density_) throw ConfigError("centering measure '" + name_ + "' has no density");
    return log_density_(p);
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Sampler sampler_;
  LogDensity log_density_;
};

inline CenteringMeasure<ScalarPoint> normal_measure(double mean, double variance) {
  if (!(variance > 0.0) || !std::isfinite(mean)) {
    throw ConfigError("normal centering measure needs finite mean and variance > 0");
  }
  const double sd = std::sqrt(variance);
  return CenteringMeasure<ScalarPoint>(
      "normal",
      [mean, sd](Rng& rng) { return mean + sd * standard_normal(rng); },
      [mean, variance](const double& y) {
        const double z = y - mean;
        return -0.5 * std::log(2.0 * std::numbers::pi * variance) - 0.5 * z * z / variance;
      });
}

inline CenteringMeasure<ScalarPoint> bernoulli_measure(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("bernoulli centering measure needs p in [0,1]");
  return CenteringMeasure<ScalarPoint>(
      "bernoulli", [p](Rng& rng) { return uniform01(rng) < p ? 1.0 : 0.0; },
      [p](const double& y) { return y == 1.0 ? std::log(p) : y == 0.0 ? std::log1p(-p) : -INFINITY; });
}

/// Uniform distribution over a fixed, non-empty atom list.
template <class Point>
CenteringMeasure<Point> empirical_measure(std::vector<Point> atoms) {
  if (atoms.empty()) throw ConfigError("empirical centering measure needs at least one atom");
  auto shared = std::make_shared<const std::vector<Point>>(std::move(atoms));
  return CenteringMeasure<Point>("empirical", [shared](Rng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, shared->size() - 1);
    return (*shared)[pick(rng)];
  });
}

/// Independent per-coordinate measures assembled into a vector point.
inline CenteringMeasure<VectorPoint> product_measure(std::vector<CenteringMeasure<ScalarPoint>> coords) {
  if (coords.empty()) throw ConfigError("product centering measure needs at least one coordinate");
  auto shared = std::make_shared<const std::vector<CenteringMeasure<ScalarPoint>>>(std::move(coords));
  bool all_densities = true;
  for (const auto& c : *shared) all_densities = all_densities && c.has_log_density();
  typename CenteringMeasure<VectorPoint>::LogDensity density;
  if (all_densities) {
    density = [shared](const VectorPoint& p) {
      if (p.size() != shared->size()) throw ConfigError("product measure: point has wrong dimension");
      double s = 0.0;
      for (std::size_t j = 0; j < p.size(); ++j) s += (*shared)[j].log_density(p[j]);
      return s;
    };
  }
  return CenteringMeasure<VectorPoint>(
      "product",
      [shared](Rng& rng) {
        VectorPoint p(shared->size());
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = (*shared)[j].draw(rng);
        return p;
      },
      std::move(density));
}

/// Diagonal normal on R^d.
inline CenteringMeasure<VectorPoint> diag_normal_measure(const std::vector<double>& mean,
                                                         const std::vector<double>& variance) {
  if (mean.size() != variance.size() || mean.empty()) {
    throw ConfigError("diagonal normal centering measure: mean/variance length mismatch");
  }
  std::vector<CenteringMeasure<ScalarPoint>> coords;
  for (std::size_t j = 0; j < mean.size(); ++j) coords.push_back(normal_measure(mean[j], variance[j]));
  return product_measure(std::move(coords));
}

/// f(y, x) = f(y) f(x): response and covariates drawn independently.
inline CenteringMeasure<LabeledPoint> labeled_product_measure(CenteringMeasure<ScalarPoint> response,
                                                              CenteringMeasure<VectorPoint> covariates) {
  return CenteringMeasure<LabeledPoint>(
      "product(" + response.name() + "," + covariates.name() + ")",
      [response = std::move(response), covariates = std::move(covariates)](Rng& rng) {
        LabeledPoint p;
        p.y = response.draw(rng);
        p.x = covariates.draw(rng);
        return p;
      });
}

}  // namespace npl
