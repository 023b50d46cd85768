#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "npl/centering.hpp"
#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/evaluate.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/parallel.hpp"
#include "npl/sampler.hpp"

namespace npl {

/// b_t = base^(t-1), t = 1..count.
inline std::vector<double> geometric_b_grid(std::size_t count = 450, double base = 0.98) {
  std::vector<double> grid(count);
  for (std::size_t t = 0; t < count; ++t) grid[t] = std::pow(base, static_cast<double>(t));
  return grid;
}

struct SweepConfig {
  double a = 1.0;
  std::vector<double> b_grid = geometric_b_grid();
  std::size_t samples_per_point = 4000;
  double interval_mass = 0.8;

  double log_c(std::size_t t) const { return std::log(b_grid[t] / a); }

  void validate() const {
    if (!(a > 0.0)) throw ConfigError("sweep.a must be > 0");
    if (b_grid.empty()) throw ConfigError("sweep.b_grid must be non-empty");
    for (double b : b_grid) {
      if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("sweep.b_grid values must be finite and > 0");
    }
    if (samples_per_point < 2) throw ConfigError("sweep.samples_per_point must be >= 2");
    if (!(interval_mass > 0.0 && interval_mass < 1.0)) throw ConfigError("sweep.interval_mass must lie in (0,1)");
  }
};

struct SweepPoint {
  std::size_t t = 0;  // 1-based grid index
  double b = 0.0;
  double log_c = 0.0;
  std::vector<CoordinateSummary> coefficients;  // intercept excluded
  std::size_t failed = 0;
  bool ok = true;
  std::string message;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool any_failed = false;
};

/// Posterior medians and central intervals of every coefficient along a grid
/// of ARD scales b_t with a fixed, gamma = 1/n.
///
/// Each (t, i) pair is an independent task seeded from (master_seed, t, i),
/// so the sweep parallelises over grid points and draws at once and is
/// deterministic for any worker count. A grid point whose failure rate
/// exceeds cfg.max_failed_fraction is flagged and the sweep continues.
inline SweepResult sparsity_path_sweep(std::size_t covariates, const std::vector<LabeledPoint>& data,
                                       const CenteringMeasure<LabeledPoint>& f_pi, const DpConfig& dp,
                                       const RestartPolicy& policy, const SweepConfig& sweep,
                                       const SamplerConfig& cfg) {
  sweep.validate();
  const double gamma = 1.0 / static_cast<double>(data.size());
  std::vector<LogisticArdModel> models;
  models.reserve(sweep.b_grid.size());
  for (double b : sweep.b_grid) models.emplace_back(covariates, ArdPenalty{sweep.a, b, gamma});
  SamplerConfig point_cfg = cfg;
  point_cfg.B = sweep.samples_per_point;
  validate_sampling_inputs(models.front(), data.size(), dp, policy, point_cfg);
  const OptimConfig optim = cfg.optim.value_or(OptimConfig::quasi_newton_defaults());

  const std::size_t T = sweep.b_grid.size(), B = sweep.samples_per_point;
  std::vector<SampleOutcome> outcomes(T * B);
  parallel_for(T * B, cfg.workers, [&](std::size_t task) {
    const std::size_t t = task / B, i = task % B;
    const std::uint64_t point_seed = derive_seed(cfg.master_seed, {0x5357454550ULL, t + 1});
    outcomes[task] = bootstrap_one(models[t], data, f_pi, dp, policy, optim, point_seed, cfg.retries, i + 1);
  });

  SweepResult result;
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<SampleOutcome> slice(std::make_move_iterator(outcomes.begin() + static_cast<std::ptrdiff_t>(t * B)),
                                     std::make_move_iterator(outcomes.begin() + static_cast<std::ptrdiff_t>((t + 1) * B)));
    const PosteriorSamples samples = assemble_samples(models[t], slice);
    SweepPoint p;
    p.t = t + 1;
    p.b = sweep.b_grid[t];
    p.log_c = sweep.log_c(t);
    p.failed = samples.failed.size();
    if (static_cast<double>(p.failed) > cfg.max_failed_fraction * static_cast<double>(B)) {
      p.ok = false;
      p.message = std::to_string(p.failed) + " of " + std::to_string(B) + " draws failed";
    }
    if (samples.rows() >= 2) {
      for (std::size_t j = 0; j < covariates; ++j) p.coefficients.push_back(summarize(samples.column(j), sweep.interval_mass));
    } else {
      p.ok = false;
      if (p.message.empty()) p.message = "fewer than two successful draws";
    }
    result.any_failed = result.any_failed || !p.ok;
    result.points.push_back(std::move(p));
  }
  return result;
}

}  // namespace npl
