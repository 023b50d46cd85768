#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npl/dp.hpp"
#include "npl/error.hpp"
#include "npl/init.hpp"
#include "npl/io/csv.hpp"
#include "npl/optimize.hpp"
#include "npl/sampler.hpp"
#include "npl/sweep.hpp"

namespace npl {

struct ModelSpec {
  std::string family;  // normal_location | gmm | logistic
  std::size_t K = 0;
  std::size_t d = 0;
  double sigma2 = 1.0;
  double variance_floor = kDefaultVarianceFloor;
  double a = 1.0;
  double b = 1.0;
  std::optional<double> gamma;  // default 1 / n_observed
};

/// Base-measure description; resolved against the data at run time.
struct CenteringSpec {
  std::string type = "empirical";  // normal | diag_normal | empirical | product
  double mean = 0.0;
  double variance = 1.0;
  std::vector<double> means;
  std::vector<double> variances;
  double response_p = 0.5;                    // product: Bernoulli(p) response
  std::string covariates = "empirical";       // product: empirical | diag_normal
};

struct RestartSpec {
  std::string type = "random";  // random | fixed
  std::size_t R = 10;
  std::optional<std::size_t> stop_after_no_improvement;
  std::optional<InitSampler> init;
  std::vector<double> theta;
  std::string theta_file;
};

struct EvaluateSpec {
  std::string test_path;
  double epsilon = 0.1;
  double interval_mass = 0.8;
};

struct ExperimentConfig {
  ModelSpec model;
  std::string data_path;
  io::ColumnSchema schema;
  DpConfig dp;
  CenteringSpec centering;
  RestartSpec restart;
  SamplerConfig sampler;
  std::optional<SweepConfig> sweep;
  std::optional<EvaluateSpec> evaluate;
  nlohmann::json raw;
};

namespace detail {

/// Accumulates every problem found so that one run reports all of them.
class ConfigErrors {
 public:
  void add(const std::string& msg) { errors_.push_back(msg); }

  template <class Fn>
  void guard(const std::string& where, Fn&& fn) {
    try {
      fn();
    } catch (const nlohmann::json::exception& e) {
      std::string msg = e.what();
      if (const auto p = msg.find("] "); msg.starts_with("[json.exception") && p != std::string::npos) msg.erase(0, p + 2);
      add(where + ": " + msg);
    } catch (const ConfigError& e) {
      add(where + ": " + e.what());
    }
  }

  void throw_if_any() const {
    if (errors_.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& e : errors_) msg += "\n  - " + e;
    throw ConfigError(msg);
  }

  bool empty() const { return errors_.empty(); }

 private:
  std::vector<std::string> errors_;
};

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

template <class T>
T positive(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  const T v = j.at(key).get<T>();
  if (!(v > T{0})) throw ConfigError(std::string(key) + " must be > 0");
  return v;
}

inline InitDistribution parse_init_distribution(const nlohmann::json& j) {
  const auto dist = j.at("dist").get<std::string>();
  InitDistribution out;
  if (dist == "uniform") {
    out = UniformInit{j.at("lower").get<double>(), j.at("upper").get<double>()};
  } else if (dist == "normal") {
    out = NormalInit{j.value("mean", 0.0), j.value("variance", 1.0)};
  } else if (dist == "gamma") {
    out = GammaInit{j.at("shape").get<double>(), j.value("rate", 1.0)};
  } else if (dist == "inv_gamma") {
    out = InverseGammaInit{j.at("shape").get<double>(), j.value("scale", 1.0)};
  } else if (dist == "lognormal") {
    out = LogNormalInit{j.value("mu", 0.0), j.value("sigma2", 1.0)};
  } else if (dist == "dirichlet") {
    out = DirichletInit{j.value("concentration", 1.0)};
  } else {
    throw ConfigError("unknown init distribution '" + dist + "'");
  }
  return out;
}

inline std::vector<ParameterBlock> blocks_for(const ModelSpec& m) {
  if (m.family == "normal_location") return {{"theta", 1}};
  if (m.family == "gmm") return {{"pi", m.K}, {"mu", m.K * m.d}, {"sigma2", m.K * m.d}};
  if (m.family == "logistic") return {{"beta", m.d}, {"intercept", 1}};
  return {};
}

inline std::size_t dimension_for(const ModelSpec& m) {
  std::size_t n = 0;
  for (const auto& b : blocks_for(m)) n += b.size;
  return n;
}

}  // namespace detail

/// Parses and validates an experiment description. Relative paths are
/// resolved against `base_dir`. Every invalid field is reported in a single
/// ConfigError before anything is computed.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  detail::ConfigErrors errs;
  ExperimentConfig c;
  c.raw = j;
  if (!j.is_object()) throw ConfigError("invalid configuration: top level must be an object");

  errs.guard("model", [&] {
    const auto& m = j.at("model");
    c.model.family = m.at("family").get<std::string>();
    if (c.model.family == "normal_location") {
      c.model.sigma2 = detail::positive(m, "sigma2", 1.0);
    } else if (c.model.family == "gmm") {
      c.model.K = m.at("K").get<std::size_t>();
      c.model.d = m.value("d", std::size_t{1});
      if (c.model.K < 1 || c.model.d < 1) throw ConfigError("K and d must be >= 1");
      c.model.variance_floor = detail::positive(m, "variance_floor", kDefaultVarianceFloor);
    } else if (c.model.family == "logistic") {
      c.model.a = detail::positive(m, "a", 1.0);
      c.model.b = detail::positive(m, "b", 1.0);
      if (m.contains("gamma") && !m.at("gamma").is_null()) {
        c.model.gamma = m.at("gamma").get<double>();
        if (!(*c.model.gamma >= 0.0)) throw ConfigError("gamma must be >= 0");
      }
    } else {
      throw ConfigError("family must be one of normal_location, gmm, logistic (got '" + c.model.family + "')");
    }
  });

  errs.guard("data", [&] {
    const auto& d = j.at("data");
    c.data_path = detail::resolve_path(d.at("path").get<std::string>(), base_dir);
    c.schema.standardize = d.value("standardize", false);
    if (c.model.family == "normal_location") {
      c.schema.y_column = d.value("column", std::string("y"));
      c.schema.covariates = false;
    } else if (c.model.family == "gmm") {
      c.schema.x_columns = d.value("columns", std::vector<std::string>{});
      if (!c.schema.x_columns.empty() && c.schema.x_columns.size() != c.model.d) {
        throw ConfigError("columns must list exactly d = " + std::to_string(c.model.d) + " names");
      }
    } else if (c.model.family == "logistic") {
      c.schema.y_column = d.value("y_column", std::string("y"));
      c.schema.x_columns = d.value("x_columns", std::vector<std::string>{});
      c.schema.binary_response = true;
      if (!c.schema.x_columns.empty()) c.model.d = c.schema.x_columns.size();
    }
  });

  errs.guard("dp", [&] {
    const nlohmann::json d = j.value("dp", nlohmann::json::object());
    c.dp.alpha = d.value("alpha", 0.0);
    if (d.contains("epsilon")) {
      if (d.contains("T")) throw ConfigError("give either T or epsilon, not both");
      c.dp.truncation = AdaptiveTruncation{d.at("epsilon").get<double>()};
    } else {
      c.dp.truncation = FixedTruncation{d.value("T", std::size_t{100})};
    }
    c.dp.validate();
    if (d.contains("centering")) {
      const auto& cm = d.at("centering");
      c.centering.type = cm.at("type").get<std::string>();
      const auto& t = c.centering.type;
      if (t == "normal") {
        c.centering.mean = cm.value("mean", 0.0);
        c.centering.variance = detail::positive(cm, "variance", 1.0);
      } else if (t == "diag_normal") {
        c.centering.means = cm.at("mean").get<std::vector<double>>();
        c.centering.variances = cm.at("variance").get<std::vector<double>>();
        if (c.centering.means.size() != c.centering.variances.size()) throw ConfigError("centering mean/variance lengths differ");
        for (double v : c.centering.variances) {
          if (!(v > 0.0)) throw ConfigError("centering variances must be > 0");
        }
      } else if (t == "product") {
        c.centering.response_p = cm.value("p", 0.5);
        if (!(c.centering.response_p >= 0.0 && c.centering.response_p <= 1.0)) throw ConfigError("centering p must lie in [0,1]");
        c.centering.covariates = cm.value("x", std::string("empirical"));
        if (c.centering.covariates == "diag_normal") {
          c.centering.means = cm.at("mean").get<std::vector<double>>();
          c.centering.variances = cm.at("variance").get<std::vector<double>>();
        } else if (c.centering.covariates != "empirical") {
          throw ConfigError("product centering x must be empirical or diag_normal");
        }
      } else if (t != "empirical") {
        throw ConfigError("unknown centering type '" + t + "'");
      }
    }
    const auto& t = c.centering.type;
    const auto& fam = c.model.family;
    if ((t == "normal" && fam != "normal_location") || (t == "diag_normal" && fam != "gmm") ||
        (t == "product" && fam != "logistic")) {
      throw ConfigError("centering type '" + t + "' does not fit model family '" + fam + "'");
    }
    if (t == "diag_normal" && c.centering.means.size() != c.model.d) {
      throw ConfigError("centering dimension does not match d");
    }
  });

  errs.guard("restart", [&] {
    const nlohmann::json r = j.value("restart", nlohmann::json::object());
    c.restart.type = r.value("type", std::string("random"));
    if (c.restart.type == "random") {
      c.restart.R = r.value("R", std::size_t{10});
      if (c.restart.R < 1) throw ConfigError("R must be >= 1");
      if (r.contains("stop_after_no_improvement") && !r.at("stop_after_no_improvement").is_null()) {
        c.restart.stop_after_no_improvement = r.at("stop_after_no_improvement").get<std::size_t>();
        if (*c.restart.stop_after_no_improvement < 1) throw ConfigError("stop_after_no_improvement must be >= 1");
      }
      if (!r.contains("init")) {
        throw ConfigError("random restarts need an 'init' block with a distribution for every parameter block");
      }
      {
        InitSampler s;
        for (const auto& [name, spec] : r.at("init").items()) s.set(name, detail::parse_init_distribution(spec));
        if (!c.model.family.empty() && (c.model.family != "logistic" || c.model.d > 0)) {
          s.validate(detail::blocks_for(c.model));
        }
        c.restart.init = std::move(s);
      }
    } else if (c.restart.type == "fixed") {
      if (r.contains("theta")) {
        c.restart.theta = r.at("theta").get<std::vector<double>>();
      } else {
        c.restart.theta_file = detail::resolve_path(r.at("theta_file").get<std::string>(), base_dir);
      }
      if (!c.restart.theta.empty() && (c.model.family != "logistic" || c.model.d > 0) &&
          c.restart.theta.size() != detail::dimension_for(c.model)) {
        throw ConfigError("theta has " + std::to_string(c.restart.theta.size()) + " values, model expects " +
                          std::to_string(detail::dimension_for(c.model)));
      }
    } else {
      throw ConfigError("type must be random or fixed");
    }
  });

  errs.guard("sampler", [&] {
    const nlohmann::json s = j.value("sampler", nlohmann::json::object());
    c.sampler.B = s.value("B", std::size_t{1000});
    c.sampler.master_seed = s.value("seed", std::uint64_t{0});
    c.sampler.workers = s.value("workers", std::size_t{0});
    c.sampler.max_failed_fraction = s.value("max_failed_fraction", 0.01);
    c.sampler.validate();
  });

  errs.guard("optim", [&] {
    if (!j.contains("optim")) return;
    const auto& o = j.at("optim");
    OptimConfig oc = c.model.family == "gmm" ? OptimConfig::em_defaults() : OptimConfig::quasi_newton_defaults();
    oc.max_iterations = o.value("max_iterations", oc.max_iterations);
    oc.tolerance = o.value("tolerance", oc.tolerance);
    oc.gradient_tolerance = o.value("gradient_tolerance", oc.gradient_tolerance);
    oc.em_variance_floor = c.model.variance_floor;
    oc.memory = o.value("memory", oc.memory);
    oc.validate();
    c.sampler.optim = oc;
  });

  errs.guard("sweep", [&] {
    if (!j.contains("sweep")) return;
    if (c.model.family != "logistic") throw ConfigError("sweeps require the logistic family");
    const auto& s = j.at("sweep");
    SweepConfig sw;
    sw.a = s.value("a", c.model.a);
    if (s.contains("b_grid")) {
      const auto& g = s.at("b_grid");
      if (g.is_array()) {
        sw.b_grid = g.get<std::vector<double>>();
      } else {
        sw.b_grid = geometric_b_grid(g.value("count", std::size_t{450}), g.value("base", 0.98));
      }
    }
    sw.samples_per_point = s.value("samples_per_point", std::size_t{4000});
    sw.interval_mass = s.value("interval_mass", 0.8);
    sw.validate();
    c.sweep = std::move(sw);
  });

  errs.guard("evaluate", [&] {
    if (!j.contains("evaluate")) return;
    const auto& e = j.at("evaluate");
    EvaluateSpec ev;
    ev.test_path = detail::resolve_path(e.value("test_path", std::string{}), base_dir);
    ev.epsilon = detail::positive(e, "epsilon", 0.1);
    ev.interval_mass = e.value("interval_mass", 0.8);
    if (!(ev.interval_mass > 0.0 && ev.interval_mass < 1.0)) throw ConfigError("interval_mass must lie in (0,1)");
    c.evaluate = std::move(ev);
  });

  for (const auto& [key, value] : j.items()) {
    static const std::vector<std::string> known = {"model", "data", "dp", "restart", "sampler",
                                                   "optim", "sweep", "evaluate", "description"};
    if (std::find(known.begin(), known.end(), key) == known.end()) errs.add("unknown top-level key '" + key + "'");
  }
  errs.throw_if_any();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open configuration file");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).parent_path());
}

}  // namespace npl
