#pragma once

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "npl/config.hpp"
#include "npl/evaluate.hpp"
#include "npl/io/archive.hpp"
#include "npl/io/csv.hpp"
#include "npl/models/gmm.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/models/normal_location.hpp"
#include "npl/sampler.hpp"
#include "npl/sweep.hpp"

namespace npl::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kConfigError = 2,
  kDataError = 3,
  kNumericalError = 4,
  kPartialSweep = 5,
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

/// Runs `body`, mapping library exceptions to exit codes and printing the
/// message to `err`.
template <class Fn>
int guarded(std::ostream& err, Fn&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const nlohmann::json::exception& e) {
    err << "data error: " << e.what() << '\n';
    return kDataError;
  }
}

inline void apply_overrides(ExperimentConfig& c, const Overrides& o) {
  if (o.seed) {
    c.sampler.master_seed = *o.seed;
    c.raw["sampler"]["seed"] = *o.seed;
  }
  if (o.workers) c.sampler.workers = *o.workers;
}

/// Model hyperparameters as stored in archive metadata.
inline nlohmann::json model_json(const ModelSpec& m, std::size_t d, std::optional<double> gamma) {
  nlohmann::json j = {{"family", m.family}};
  if (m.family == "normal_location") j["sigma2"] = m.sigma2;
  if (m.family == "gmm") {
    j["K"] = m.K;
    j["d"] = m.d;
    j["variance_floor"] = m.variance_floor;
  }
  if (m.family == "logistic") {
    j["d"] = d;
    j["a"] = m.a;
    j["b"] = m.b;
    j["gamma"] = gamma.value_or(0.0);
  }
  return j;
}

inline nlohmann::json schema_json(const io::ColumnSchema& s, const io::IngestedData& data) {
  nlohmann::json j = {{"x_columns", data.x_names}, {"standardize", s.standardize}, {"binary_response", s.binary_response}};
  j["y_column"] = s.y_column ? nlohmann::json(*s.y_column) : nlohmann::json(nullptr);
  if (!data.standardization.empty()) {
    j["standardization"] = {{"mean", data.standardization.mean}, {"sd", data.standardization.sd}};
  }
  return j;
}

inline std::vector<double> read_theta_file(const std::string& path, std::size_t dim) {
  const auto t = io::read_csv(path);
  if (t.rows.empty()) throw ConfigError(path + ": theta file has no data row");
  if (t.rows.front().size() != dim) {
    throw ConfigError(path + ": theta file has " + std::to_string(t.rows.front().size()) + " columns, model expects " +
                      std::to_string(dim));
  }
  return t.rows.front();
}

/// Everything needed to run one experiment for a concrete model family.
template <class Model>
struct Experiment {
  Model model;
  std::vector<typename Model::point_type> points;
  CenteringMeasure<typename Model::point_type> f_pi;
  RestartPolicy policy;
  io::IngestedData ingested;
  nlohmann::json model_meta;
};

template <class Model>
RestartPolicy build_policy(const ExperimentConfig& c, const Model& model) {
  if (c.restart.type == "fixed") {
    auto theta = c.restart.theta.empty() ? read_theta_file(c.restart.theta_file, model.dimension()) : c.restart.theta;
    return FixedInit{std::move(theta)};
  }
  RandomRestart rr;
  rr.R = c.restart.R;
  rr.stop_after_no_improvement = c.restart.stop_after_no_improvement;
  rr.init = *c.restart.init;
  return rr;
}

/// Loads the data named by the config, builds the model and calls
/// fn(Experiment<Model>&) for the configured family.
template <class Fn>
decltype(auto) with_experiment(const ExperimentConfig& c, Fn&& fn) {
  io::IngestedData data = io::ingest_csv(c.data_path, c.schema);
  if (data.x.empty() && data.y.empty()) throw DataError(c.data_path + ": no data rows");
  const auto n = std::max(data.x.size(), data.y.size());
  if (n == 0) throw DataError(c.data_path + ": no data rows");

  if (c.model.family == "normal_location") {
    NormalLocationModel model(c.model.sigma2);
    auto points = data.scalar_points();
    auto f_pi = c.centering.type == "normal" ? normal_measure(c.centering.mean, c.centering.variance)
                                             : empirical_measure(points);
    Experiment<NormalLocationModel> e{model, std::move(points), std::move(f_pi), build_policy(c, model), std::move(data),
                                      model_json(c.model, 0, std::nullopt)};
    return fn(e);
  }
  if (c.model.family == "gmm") {
    if (data.x_names.size() != c.model.d) {
      throw DataError(c.data_path + ": found " + std::to_string(data.x_names.size()) + " data columns, model d = " +
                      std::to_string(c.model.d));
    }
    GmmModel model(c.model.K, c.model.d, c.model.variance_floor);
    auto points = data.vector_points();
    auto f_pi = c.centering.type == "diag_normal" ? diag_normal_measure(c.centering.means, c.centering.variances)
                                                  : empirical_measure(points);
    Experiment<GmmModel> e{model, std::move(points), std::move(f_pi), build_policy(c, model), std::move(data),
                           model_json(c.model, c.model.d, std::nullopt)};
    return fn(e);
  }
  const std::size_t d = data.x_names.size();
  if (d == 0) throw DataError(c.data_path + ": no covariate columns");
  const double gamma = c.model.gamma.value_or(1.0 / static_cast<double>(n));
  LogisticArdModel model(d, ArdPenalty{c.model.a, c.model.b, gamma});
  auto points = data.labeled_points();
  std::optional<CenteringMeasure<LabeledPoint>> f_pi;
  if (c.centering.type == "product") {
    std::vector<VectorPoint> xs = data.x;
    auto cov = c.centering.covariates == "diag_normal" ? diag_normal_measure(c.centering.means, c.centering.variances)
                                                       : empirical_measure(std::move(xs));
    f_pi = labeled_product_measure(bernoulli_measure(c.centering.response_p), std::move(cov));
  } else {
    f_pi = empirical_measure(points);
  }
  Experiment<LogisticArdModel> e{model, std::move(points), std::move(*f_pi), build_policy(c, model), std::move(data),
                                 model_json(c.model, d, gamma)};
  return fn(e);
}

/// `sample`: posterior bootstrap to a CSV archive plus JSON sidecar.
inline int cmd_sample(const std::string& config_path, const Overrides& overrides, const std::string& out_path,
                      std::ostream& log) {
  ExperimentConfig c = load_config(config_path);
  apply_overrides(c, overrides);
  return with_experiment(c, [&](auto& e) {
    const PosteriorSamples s = posterior_bootstrap(e.model, e.points, e.f_pi, c.dp, e.policy, c.sampler);
    nlohmann::json extra;
    extra["config"] = c.raw;
    extra["model"] = e.model_meta;
    extra["data"] = schema_json(c.schema, e.ingested);
    extra["data"]["path"] = c.data_path;
    extra["data"]["n"] = e.points.size();
    io::write_archive(out_path, s, extra);
    log << "wrote " << s.rows() << " samples (" << s.failed.size() << " failed) to " << out_path << " in "
        << s.wall_seconds << " s\n";
    return static_cast<int>(kSuccess);
  });
}

struct EvaluateOptions {
  std::string archive_path;
  std::string test_path;
  double epsilon = 0.1;
  std::string out_path;  // optional copy of the report
};

/// Report fields: n_test, mean_lppd, and for binary tasks mse,
/// accuracy_percent, sparsity_fraction (at epsilon).
inline nlohmann::json evaluate_archive(const EvaluateOptions& opt) {
  const io::Archive a = io::read_archive(opt.archive_path);
  if (a.meta.is_null()) throw DataError(opt.archive_path + ": missing metadata sidecar " + io::sidecar_path(opt.archive_path));
  const auto& mj = a.meta.at("model");
  const auto& dj = a.meta.at("data");
  const std::string family = mj.at("family").get<std::string>();

  io::ColumnSchema schema;
  if (!dj.at("y_column").is_null()) schema.y_column = dj.at("y_column").get<std::string>();
  schema.x_columns = dj.at("x_columns").get<std::vector<std::string>>();
  schema.binary_response = dj.value("binary_response", false);
  schema.covariates = family != "normal_location";
  io::Standardization stdz;
  if (dj.contains("standardization")) {
    stdz.mean = dj.at("standardization").at("mean").get<std::vector<double>>();
    stdz.sd = dj.at("standardization").at("sd").get<std::vector<double>>();
  }
  const io::IngestedData test = io::ingest_csv(opt.test_path, schema, &stdz);

  auto check_layout = [&](std::size_t expected) {
    if (a.samples.dimension() != expected) {
      throw DataError(opt.archive_path + ": archive has " + std::to_string(a.samples.dimension()) +
                      " columns, model family '" + family + "' expects " + std::to_string(expected));
    }
  };

  nlohmann::json report;
  report["archive"] = opt.archive_path;
  report["test"] = opt.test_path;
  if (family == "normal_location") {
    NormalLocationModel m(mj.at("sigma2").get<double>());
    check_layout(m.dimension());
    const auto pts = test.scalar_points();
    report["n_test"] = pts.size();
    report["mean_lppd"] = mean_lppd(m, a.samples, pts);
  } else if (family == "gmm") {
    GmmModel m(mj.at("K").get<std::size_t>(), mj.at("d").get<std::size_t>(), mj.at("variance_floor").get<double>());
    check_layout(m.dimension());
    const auto pts = test.vector_points();
    report["n_test"] = pts.size();
    report["mean_lppd"] = mean_lppd(m, a.samples, pts);
  } else if (family == "logistic") {
    LogisticArdModel m(mj.at("d").get<std::size_t>(),
                       ArdPenalty{mj.at("a").get<double>(), mj.at("b").get<double>(), mj.at("gamma").get<double>()});
    check_layout(m.dimension());
    const auto pts = test.labeled_points();
    report["n_test"] = pts.size();
    report["mean_lppd"] = mean_lppd(m, a.samples, pts);
    const auto ma = mse_and_accuracy(m, a.samples, pts);
    report["mse"] = ma.mse;
    report["accuracy_percent"] = ma.accuracy_percent;
    report["epsilon"] = opt.epsilon;
    report["sparsity_fraction"] = sparsity_fraction(m, a.samples, opt.epsilon);
  } else {
    throw DataError(opt.archive_path + ": unknown model family '" + family + "' in sidecar");
  }
  return report;
}

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  const std::string text = evaluate_archive(opt).dump(2) + "\n";
  out << text;
  if (!opt.out_path.empty()) {
    std::ofstream f(opt.out_path, std::ios::binary);
    if (!f) throw DataError(opt.out_path + ": cannot open for writing");
    f << text;
  }
  return kSuccess;
}

/// Writes one row per (grid point, coefficient).
inline void write_sweep_csv(const std::string& path, const SweepResult& r, double interval_mass) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  const std::string pct = std::to_string(static_cast<int>(std::lround(interval_mass * 100.0)));
  io::write_csv_row(out, {"t", "b", "log_c", "coefficient", "median", "lower" + pct, "upper" + pct, "status"});
  for (const auto& p : r.points) {
    const std::string status = p.ok ? "ok" : "failed";
    for (std::size_t j = 0; j < p.coefficients.size(); ++j) {
      const auto& s = p.coefficients[j];
      io::write_csv_row(out, {std::to_string(p.t), io::format_double(p.b), io::format_double(p.log_c),
                              std::to_string(j + 1), io::format_double(s.median), io::format_double(s.lower),
                              io::format_double(s.upper), status});
    }
    if (p.coefficients.empty()) {
      io::write_csv_row(out, {std::to_string(p.t), io::format_double(p.b), io::format_double(p.log_c), "", "", "", "",
                              status});
    }
  }
}

/// `sweep`: sparsity path over the configured b grid.
inline int cmd_sweep(const std::string& config_path, const Overrides& overrides, const std::string& out_path,
                     std::ostream& log) {
  ExperimentConfig c = load_config(config_path);
  apply_overrides(c, overrides);
  if (!c.sweep) throw ConfigError("sweep: configuration has no 'sweep' block");
  if (c.model.family != "logistic") throw ConfigError("sweep: requires the logistic family");
  return with_experiment(c, [&](auto& e) -> int {
    if constexpr (std::is_same_v<std::decay_t<decltype(e.model)>, LogisticArdModel>) {
      const SweepResult r = sparsity_path_sweep(e.model.covariates(), e.points, e.f_pi, c.dp, e.policy, *c.sweep, c.sampler);
      write_sweep_csv(out_path, r, c.sweep->interval_mass);
      nlohmann::json meta;
      meta["config"] = c.raw;
      meta["data"] = schema_json(c.schema, e.ingested);
      nlohmann::json failures = nlohmann::json::array();
      for (const auto& p : r.points) {
        if (!p.ok) failures.push_back({{"t", p.t}, {"failed", p.failed}, {"message", p.message}});
      }
      meta["failed_points"] = failures;
      std::ofstream(io::sidecar_path(out_path), std::ios::binary) << meta.dump(2) << '\n';
      log << "wrote " << r.points.size() << " grid points to " << out_path << '\n';
      return r.any_failed ? kPartialSweep : kSuccess;
    } else {
      throw ConfigError("sweep: requires the logistic family");
    }
  });
}

/// `ingest-check`: validates the config and parses the data without sampling.
inline int cmd_ingest_check(const std::string& config_path, const Overrides& overrides, std::ostream& out) {
  ExperimentConfig c = load_config(config_path);
  apply_overrides(c, overrides);
  return with_experiment(c, [&](auto& e) {
    nlohmann::json j;
    j["family"] = e.model.family();
    j["n"] = e.points.size();
    j["parameters"] = e.model.parameter_names();
    j["data"] = schema_json(c.schema, e.ingested);
    j["data"]["path"] = c.data_path;
    j["centering"] = e.f_pi.name();
    j["policy"] = describe(e.policy);
    validate_sampling_inputs(e.model, e.points.size(), c.dp, e.policy, c.sampler);
    if (c.evaluate && !c.evaluate->test_path.empty()) {
      const auto test = io::ingest_csv(c.evaluate->test_path, c.schema, &e.ingested.standardization);
      j["n_test"] = std::max(test.x.size(), test.y.size());
    }
    out << j.dump(2) << '\n';
    return static_cast<int>(kSuccess);
  });
}

}  // namespace npl::cli
