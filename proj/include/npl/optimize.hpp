#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/model.hpp"
#include "npl/models/gmm.hpp"
#include "npl/random.hpp"

namespace npl {

struct OptimConfig {
  std::size_t max_iterations = 200;
  double tolerance = 1e-6;           // relative objective change (EM)
  double gradient_tolerance = 1e-5;  // sup-norm of the gradient (quasi-Newton)
  double em_variance_floor = kDefaultVarianceFloor;
  std::size_t memory = 10;           // quasi-Newton correction pairs

  static OptimConfig em_defaults() {
    OptimConfig c;
    c.max_iterations = 500;
    return c;
  }
  static OptimConfig quasi_newton_defaults() { return OptimConfig{}; }

  void validate() const {
    if (max_iterations < 1) throw ConfigError("optim.max_iterations must be >= 1");
    if (!(tolerance > 0.0)) throw ConfigError("optim.tolerance must be > 0");
    if (!(gradient_tolerance > 0.0)) throw ConfigError("optim.gradient_tolerance must be > 0");
    if (!(em_variance_floor > 0.0)) throw ConfigError("optim.em_variance_floor must be > 0");
    if (memory < 1) throw ConfigError("optim.memory must be >= 1");
  }
};

struct OptimResult {
  std::vector<double> theta;
  double objective = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after each accepted iterate, starting with the initial point
};

// ---------------------------------------------------------------------------
// Weighted EM
// ---------------------------------------------------------------------------

/// Iterates em_step until the relative gain in weighted log-likelihood drops
/// below cfg.tolerance. The objective reported is the weighted negative
/// log-likelihood.
template <EmModel M>
OptimResult run_weighted_em(const M& model, const WeightedDataset<typename M::point_type>& data,
                            std::vector<double> init, const OptimConfig& cfg) {
  cfg.validate();
  OptimResult res;
  std::vector<double> theta = std::move(init);
  double prev_ll = 0.0;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    auto step = [&] {
      try {
        return model.em_step_flat(theta, data);
      } catch (const DegenerateComponentError& e) {
        throw DegenerateComponentError(e.component(),
                                       std::string(e.what()) + " (EM iteration " + std::to_string(it) + ")");
      }
    }();
    const double ll = step.loglik_before;
    res.trace.push_back(-ll);
    if (it > 0 && ll - prev_ll <= cfg.tolerance * std::abs(prev_ll)) {
      res.theta = std::move(theta);
      res.objective = -ll;
      res.iterations = it;
      res.converged = true;
      return res;
    }
    prev_ll = ll;
    theta = std::move(step.theta);
  }
  res.objective = model.weighted_loss(theta, data);
  res.trace.push_back(res.objective);
  res.theta = std::move(theta);
  res.iterations = cfg.max_iterations;
  res.converged = false;
  return res;
}

inline OptimResult run_weighted_em(const GmmModel& model, const WeightedDataset<VectorPoint>& data,
                                   const GmmParams& init, const OptimConfig& cfg) {
  init.validate(cfg.em_variance_floor);
  const GmmModel m(model.components(), model.data_dimension(), cfg.em_variance_floor);
  return run_weighted_em(m, data, init.pack(), cfg);
}

// ---------------------------------------------------------------------------
// Limited-memory BFGS with a strong-Wolfe line search
// ---------------------------------------------------------------------------

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double sup_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Minimiser of the cubic interpolating (a, fa, ga) and (b, fb, gb),
/// safeguarded into the interior of [lo, hi].
inline double cubic_step(double a, double fa, double ga, double b, double fb, double gb) {
  const double d1 = ga + gb - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - ga * gb;
  const double lo = std::min(a, b), hi = std::max(a, b);
  double t = 0.5 * (a + b);
  if (disc >= 0.0) {
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double c = b - (b - a) * (gb + d2 - d1) / (gb - ga + 2.0 * d2);
    if (std::isfinite(c)) t = c;
  }
  const double margin = 0.1 * (hi - lo);
  return std::clamp(t, lo + margin, hi - margin);
}

struct LineSearchPoint {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;
  std::vector<double> x;
  std::vector<double> g;
};

}  // namespace detail

template <GradientModel M>
OptimResult run_quasi_newton(const M& model, const WeightedDataset<typename M::point_type>& data,
                             std::vector<double> init, const OptimConfig& cfg) {
  cfg.validate();
  for (double v : init) {
    if (!std::isfinite(v)) throw ConfigError("run_quasi_newton: initial point is not finite");
  }
  constexpr double c1 = 1e-4, c2 = 0.9;
  constexpr int kMaxEvals = 40;
  const std::size_t n = init.size();

  auto evaluate = [&](std::span<const double> x, double step, std::span<const double> dir) {
    detail::LineSearchPoint p;
    p.step = step;
    p.x.assign(x.begin(), x.end());
    for (std::size_t i = 0; i < n; ++i) p.x[i] += step * dir[i];
    try {
      p.f = model.weighted_loss(p.x, data);
      p.g = model.weighted_gradient(p.x, data);
      p.slope = detail::dot(p.g, dir);
    } catch (const NumericalError&) {
      p.f = std::numeric_limits<double>::infinity();
      p.g.assign(n, 0.0);
      p.slope = 0.0;
    }
    return p;
  };

  OptimResult res;
  std::vector<double> x = std::move(init);
  double f = model.weighted_loss(x, data);
  std::vector<double> g = model.weighted_gradient(x, data);
  res.trace.push_back(f);

  std::deque<std::pair<std::vector<double>, std::vector<double>>> pairs;  // (s, y)
  std::vector<double> dir(n), alpha_buf;

  std::size_t it = 0;
  bool converged = detail::sup_norm(g) <= cfg.gradient_tolerance;
  while (!converged && it < cfg.max_iterations) {
    // Two-loop recursion for dir = -H g.
    dir = g;
    alpha_buf.assign(pairs.size(), 0.0);
    for (std::size_t k = pairs.size(); k-- > 0;) {
      const auto& [s, y] = pairs[k];
      alpha_buf[k] = detail::dot(s, dir) / detail::dot(y, s);
      for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha_buf[k] * y[i];
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      const double scale = detail::dot(s, y) / detail::dot(y, y);
      for (double& v : dir) v *= scale;
    }
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto& [s, y] = pairs[k];
      const double beta = detail::dot(y, dir) / detail::dot(y, s);
      for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha_buf[k] - beta) * s[i];
    }
    for (double& v : dir) v = -v;

    double slope0 = detail::dot(g, dir);
    if (!(slope0 < 0.0)) {
      pairs.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope0 = detail::dot(g, dir);
    }
    double step = 1.0;
    if (pairs.empty()) step = std::min(1.0, 1.0 / std::sqrt(detail::dot(g, g)));

    // Bracketing phase followed by zoom (Nocedal & Wright, Alg. 3.5 / 3.6).
    detail::LineSearchPoint prev{0.0, f, slope0, x, g};
    detail::LineSearchPoint lo, hi;
    std::optional<detail::LineSearchPoint> accepted;
    bool zoom = false;
    int evals = 0;
    for (; evals < kMaxEvals; ++evals) {
      auto cur = evaluate(x, step, dir);
      if (cur.f > f + c1 * step * slope0 || (evals > 0 && cur.f >= prev.f)) {
        lo = prev;
        hi = std::move(cur);
        zoom = true;
        break;
      }
      if (std::abs(cur.slope) <= -c2 * slope0) {
        accepted = std::move(cur);
        break;
      }
      if (cur.slope >= 0.0) {
        lo = std::move(cur);
        hi = prev;
        zoom = true;
        break;
      }
      prev = std::move(cur);
      step *= 2.0;
    }
    if (zoom) {
      for (; evals < kMaxEvals && !accepted; ++evals) {
        double t;
        if (std::isfinite(hi.f)) {
          t = detail::cubic_step(lo.step, lo.f, lo.slope, hi.step, hi.f, hi.slope);
        } else {
          t = 0.5 * (lo.step + hi.step);
        }
        auto cur = evaluate(x, t, dir);
        if (cur.f > f + c1 * t * slope0 || cur.f >= lo.f) {
          hi = std::move(cur);
        } else {
          if (std::abs(cur.slope) <= -c2 * slope0) {
            accepted = std::move(cur);
            break;
          }
          if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
          lo = std::move(cur);
        }
        if (std::abs(hi.step - lo.step) <= 1e-16 * std::max(1.0, lo.step)) break;
      }
      // An interior point with sufficient decrease is still progress.
      if (!accepted && lo.step > 0.0 && lo.f < f) accepted = lo;
    }
    if (!accepted) break;  // line search failure: keep the current iterate

    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = accepted->x[i] - x[i];
      y[i] = accepted->g[i] - g[i];
    }
    const double f_prev = f;
    x = std::move(accepted->x);
    g = std::move(accepted->g);
    f = accepted->f;
    ++it;
    res.trace.push_back(f);

    if (detail::dot(s, y) > 1e-12 * std::sqrt(detail::dot(s, s) * detail::dot(y, y))) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (pairs.size() > cfg.memory) pairs.pop_front();
    }
    converged = detail::sup_norm(g) <= cfg.gradient_tolerance;
    if (!converged && f_prev - f <= 1e-15 * std::max(1.0, std::abs(f))) break;  // stagnation
  }

  res.theta = std::move(x);
  res.objective = f;
  res.iterations = it;
  res.converged = converged;
  return res;
}

// ---------------------------------------------------------------------------
// Stochastic subsampling
// ---------------------------------------------------------------------------

/// Mean gradient over m atoms drawn i.i.d. from the weights; unbiased for
/// the full weighted gradient.
template <GradientModel M>
std::vector<double> minibatch_gradient(const M& model, std::span<const double> theta,
                                       const WeightedDataset<typename M::point_type>& data, std::size_t m,
                                       Rng& rng) {
  if (m < 1) throw ConfigError("minibatch_gradient: m must be >= 1");
  std::discrete_distribution<std::size_t> pick(data.weights.begin(), data.weights.end());
  std::vector<double> g(model.dimension(), 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    const auto gi = model.point_gradient(theta, data.atoms[pick(rng)]);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += gi[j];
  }
  for (double& v : g) v /= static_cast<double>(m);
  return g;
}

}  // namespace npl
