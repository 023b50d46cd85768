#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "npl/centering.hpp"
#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/init.hpp"
#include "npl/model.hpp"
#include "npl/models/gmm.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/models/normal_location.hpp"
#include "npl/optimize.hpp"
#include "npl/parallel.hpp"
#include "npl/random.hpp"

namespace npl {

/// RR-NPL: R local optimisations from fresh initial points, keep the best.
struct RandomRestart {
  std::size_t R = 10;
  InitSampler init;
  /// Stop once this many consecutive restarts failed to improve.
  std::optional<std::size_t> stop_after_no_improvement;
};

/// FI-NPL: a single local optimisation from a fixed point.
struct FixedInit {
  std::vector<double> theta;
};

using RestartPolicy = std::variant<RandomRestart, FixedInit>;

inline std::string describe(const RestartPolicy& policy) {
  if (const auto* rr = std::get_if<RandomRestart>(&policy)) {
    std::string s = "random_restart(R=" + std::to_string(rr->R);
    if (rr->stop_after_no_improvement) s += ", stop_after=" + std::to_string(*rr->stop_after_no_improvement);
    for (const auto& [name, dist] : rr->init.blocks()) s += ", " + name + "~" + describe(dist);
    return s + ")";
  }
  return "fixed_init";
}

struct SamplerConfig {
  std::size_t B = 1000;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;  // 0 = hardware concurrency
  std::optional<OptimConfig> optim;
  double max_failed_fraction = 0.01;
  std::size_t retries = 3;

  void validate() const {
    if (B < 1) throw ConfigError("sampler.B must be >= 1");
    if (!(max_failed_fraction >= 0.0 && max_failed_fraction < 1.0)) {
      throw ConfigError("sampler.max_failed_fraction must lie in [0,1)");
    }
    if (optim) optim->validate();
  }
};

/// Result of one posterior draw.
struct SampleOutcome {
  bool ok = false;
  std::vector<double> theta;
  double objective = 0.0;
  std::size_t restart_index = 0;  // 0-based within the successful attempt
  std::size_t restarts_run = 0;
  std::size_t attempt = 0;        // 0 = first try, k = k-th retry
  std::uint64_t seed = 0;
  std::string error;
};

/// B draws from the NPL posterior. Rows are stored row-major; failed draws
/// are listed separately and have no row.
struct PosteriorSamples {
  std::string family;
  std::vector<std::string> names;
  std::vector<double> values;
  std::vector<double> objectives;
  std::vector<std::size_t> restart_index;
  std::vector<std::size_t> sample_index;  // 1-based draw index of each row
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> failed;        // 1-based draw indices
  std::vector<std::string> failure_messages;

  std::size_t requested = 0;
  std::uint64_t master_seed = 0;
  std::size_t workers = 0;
  double wall_seconds = 0.0;
  std::string dp_description;
  std::string policy_description;

  std::size_t dimension() const { return names.size(); }
  std::size_t rows() const { return names.empty() ? 0 : values.size() / names.size(); }

  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dimension(), dimension());
  }

  double at(std::size_t i, std::size_t j) const { return values[i * dimension() + j]; }

  std::vector<double> column(std::size_t j) const {
    std::vector<double> c(rows());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = at(i, j);
    return c;
  }
};

template <LossModel M>
OptimConfig default_optim_config() {
  if constexpr (EmModel<M>) return OptimConfig::em_defaults();
  return OptimConfig::quasi_newton_defaults();
}

/// Runs the family's local optimiser: closed form if available, weighted EM
/// for mixture models, quasi-Newton otherwise.
template <LossModel M>
OptimResult local_optimize(const M& model, const WeightedDataset<typename M::point_type>& data,
                           std::vector<double> init, const OptimConfig& cfg) {
  if constexpr (ClosedFormModel<M>) {
    OptimResult r;
    r.theta = model.closed_form_minimizer(data);
    r.objective = model.weighted_loss(r.theta, data);
    r.converged = true;
    r.trace = {r.objective};
    return r;
  } else if constexpr (EmModel<M>) {
    return run_weighted_em(model, data, std::move(init), cfg);
  } else {
    static_assert(GradientModel<M>, "model needs a closed form, an EM step or a gradient");
    return run_quasi_newton(model, data, std::move(init), cfg);
  }
}

inline InitSampler default_init_sampler(const NormalLocationModel&) {
  return InitSampler{{"theta", NormalInit{0.0, 1.0}}};
}

/// Intended for standardised data.
inline InitSampler default_init_sampler(const GmmModel&) {
  return InitSampler{{"pi", DirichletInit{1.0}},
                     {"mu", UniformInit{-3.0, 3.0}},
                     {"sigma2", InverseGammaInit{1.0, 1.0}}};
}

inline InitSampler default_init_sampler(const LogisticArdModel&) {
  return InitSampler{{"beta", NormalInit{0.0, 1.0}}, {"intercept", NormalInit{0.0, 1.0}}};
}

namespace detail {

template <LossModel M>
void prepare_init(const M& model, std::vector<double>& theta) {
  if constexpr (ProjectableModel<M>) model.project(theta);
}

/// Restarts for one weighted dataset; returns the best successful run.
template <LossModel M>
SampleOutcome run_restarts(const M& model, const WeightedDataset<typename M::point_type>& data,
                           const RestartPolicy& policy, const OptimConfig& cfg, Rng& rng, bool perturb) {
  SampleOutcome best;
  const auto layout = model.parameter_blocks();

  auto try_one = [&](std::vector<double> init, std::size_t r) -> bool {
    try {
      prepare_init(model, init);
      auto res = local_optimize(model, data, std::move(init), cfg);
      if (!std::isfinite(res.objective)) throw NumericalError("non-finite objective");
      ++best.restarts_run;
      if (!best.ok || res.objective < best.objective) {
        best.ok = true;
        best.theta = std::move(res.theta);
        best.objective = res.objective;
        best.restart_index = r;
        return true;
      }
    } catch (const NumericalError& e) {
      ++best.restarts_run;
      best.error = e.what();
    }
    return false;
  };

  if (const auto* rr = std::get_if<RandomRestart>(&policy)) {
    std::size_t since_improvement = 0;
    for (std::size_t r = 0; r < rr->R; ++r) {
      const bool improved = try_one(rr->init.sample(layout, rng), r);
      since_improvement = improved ? 0 : since_improvement + 1;
      if (rr->stop_after_no_improvement && best.ok && since_improvement >= *rr->stop_after_no_improvement) break;
    }
  } else {
    std::vector<double> init = std::get<FixedInit>(policy).theta;
    if (perturb) {
      for (double& v : init) v += 0.01 * std::max(std::abs(v), 1.0) * standard_normal(rng);
    }
    try_one(std::move(init), 0);
  }
  return best;
}

}  // namespace detail

/// Checks everything that can be checked before sampling starts.
template <LossModel M>
void validate_sampling_inputs(const M& model, std::size_t n_data, const DpConfig& dp, const RestartPolicy& policy,
                              const SamplerConfig& cfg) {
  if (n_data == 0) throw ConfigError("posterior_bootstrap: data must be non-empty");
  dp.validate();
  cfg.validate();
  if (const auto* rr = std::get_if<RandomRestart>(&policy)) {
    if (rr->R < 1) throw ConfigError("restart.R must be >= 1");
    if (rr->stop_after_no_improvement && *rr->stop_after_no_improvement < 1) {
      throw ConfigError("restart.stop_after_no_improvement must be >= 1");
    }
    rr->init.validate(model.parameter_blocks());
  } else {
    const auto& theta = std::get<FixedInit>(policy).theta;
    if (theta.size() != model.dimension()) {
      throw ConfigError("fixed init has " + std::to_string(theta.size()) + " values, model expects " +
                        std::to_string(model.dimension()));
    }
    if (!model.is_feasible(theta)) throw ConfigError("fixed init is not a feasible parameter");
  }
}

/// Draw number `index` (1-based) of the posterior bootstrap. Depends only on
/// its arguments, never on scheduling.
///
/// The DP draw is made once. If every restart fails the draw is retried up
/// to cfg.retries times with fresh initial points from a sub-stream while
/// the weighted dataset stays fixed.
template <LossModel M>
SampleOutcome bootstrap_one(const M& model, const std::vector<typename M::point_type>& data,
                            const CenteringMeasure<typename M::point_type>& f_pi, const DpConfig& dp,
                            const RestartPolicy& policy, const OptimConfig& optim, std::uint64_t master_seed,
                            std::uint64_t retries, std::uint64_t index) {
  const std::uint64_t seed = derive_seed(master_seed, {index});
  Rng rng = make_stream(seed);
  const auto weighted = draw_dp_posterior_dataset(data, f_pi, dp, rng);
  SampleOutcome out = detail::run_restarts(model, weighted, policy, optim, rng, false);
  for (std::uint64_t attempt = 1; !out.ok && attempt <= retries; ++attempt) {
    Rng sub = make_stream(derive_seed(master_seed, {index, attempt}));
    out = detail::run_restarts(model, weighted, policy, optim, sub, true);
    out.attempt = attempt;
  }
  out.seed = seed;
  return out;
}

/// Collects per-draw outcomes into a PosteriorSamples (failures listed, not stored).
template <LossModel M>
PosteriorSamples assemble_samples(const M& model, std::vector<SampleOutcome>& outcomes) {
  PosteriorSamples s;
  s.family = model.family();
  s.names = model.parameter_names();
  s.requested = outcomes.size();
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& o = outcomes[i];
    if (!o.ok) {
      s.failed.push_back(i + 1);
      s.failure_messages.push_back(o.error);
      continue;
    }
    s.values.insert(s.values.end(), o.theta.begin(), o.theta.end());
    s.objectives.push_back(o.objective);
    s.restart_index.push_back(o.restart_index);
    s.sample_index.push_back(i + 1);
    s.seeds.push_back(o.seed);
  }
  return s;
}

/// The posterior bootstrap: B independent draws, each the minimiser of a
/// randomly weighted loss. Output is identical for every worker count.
template <LossModel M>
PosteriorSamples posterior_bootstrap(const M& model, const std::vector<typename M::point_type>& data,
                                     const CenteringMeasure<typename M::point_type>& f_pi, const DpConfig& dp,
                                     const RestartPolicy& policy, const SamplerConfig& cfg) {
  validate_sampling_inputs(model, data.size(), dp, policy, cfg);
  const OptimConfig optim = cfg.optim.value_or(default_optim_config<M>());
  const auto start = std::chrono::steady_clock::now();

  std::vector<SampleOutcome> outcomes(cfg.B);
  parallel_for(cfg.B, cfg.workers, [&](std::size_t i) {
    outcomes[i] = bootstrap_one(model, data, f_pi, dp, policy, optim, cfg.master_seed, cfg.retries, i + 1);
  });

  PosteriorSamples s = assemble_samples(model, outcomes);
  s.master_seed = cfg.master_seed;
  s.workers = resolve_worker_count(cfg.workers);
  s.dp_description = dp.describe();
  s.policy_description = describe(policy);
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (static_cast<double>(s.failed.size()) > cfg.max_failed_fraction * static_cast<double>(cfg.B)) {
    throw NumericalError(std::to_string(s.failed.size()) + " of " + std::to_string(cfg.B) +
                         " posterior draws failed (first: " + s.failure_messages.front() + ")");
  }
  return s;
}

}  // namespace npl
