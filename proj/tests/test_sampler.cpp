#include <gtest/gtest.h>

#include <cmath>

#include "npl/npl.hpp"
#include "npl/synthetic.hpp"
#include "oracles.hpp"

using namespace npl;

namespace {

std::vector<double> normal_data(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  std::vector<double> y(n);
  for (auto& v : y) v = standard_normal(rng);
  return y;
}

SamplerConfig sampler(std::size_t B, std::uint64_t seed, std::size_t workers = 1) {
  SamplerConfig c;
  c.B = B;
  c.master_seed = seed;
  c.workers = workers;
  return c;
}

}  // namespace

TEST(PosteriorBootstrap, BayesianBootstrapMoments) {
  const auto y = normal_data(100, 41);
  const auto s = posterior_bootstrap(NormalLocationModel(), y, normal_measure(0, 1), DpConfig{0.0, FixedTruncation{}},
                                     RestartPolicy{FixedInit{{0.0}}}, sampler(5000, 7, 0));
  ASSERT_EQ(s.rows(), 5000u);
  const auto th = s.column(0);
  const double v = oracle::variance(th);
  EXPECT_NEAR(oracle::mean(th), oracle::mean(y), 3.0 * std::sqrt(v / 5000));
  EXPECT_NEAR(v / oracle::bayesian_bootstrap_variance(y), 1.0, 0.1);
}

TEST(PosteriorBootstrap, FixedInitConvexEqualsClosedForm) {
  const auto y = normal_data(30, 42);
  const DpConfig dp{2.0, FixedTruncation{20}};
  const auto f = normal_measure(0, 1);
  const auto s = posterior_bootstrap(NormalLocationModel(), y, f, dp, RestartPolicy{FixedInit{{5.0}}}, sampler(50, 9));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    Rng rng = derive_sample_stream(9, i + 1);
    const auto d = draw_dp_posterior_dataset(y, f, dp, rng);
    EXPECT_EQ(s.at(i, 0), normal_location_minimizer(d));
  }
}

TEST(PosteriorBootstrap, FixedInitQuasiNewtonMatchesClosedForm) {
  // A gradient-only wrapper forces the quasi-Newton path on a convex loss.
  struct GradOnly {
    using point_type = double;
    NormalLocationModel inner{1.0};
    std::size_t dimension() const { return 1; }
    std::string family() const { return "grad_only"; }
    std::vector<ParameterBlock> parameter_blocks() const { return inner.parameter_blocks(); }
    std::vector<std::string> parameter_names() const { return inner.parameter_names(); }
    double weighted_loss(std::span<const double> t, const WeightedDataset<double>& d) const { return inner.weighted_loss(t, d); }
    std::vector<double> weighted_gradient(std::span<const double> t, const WeightedDataset<double>& d) const {
      return inner.weighted_gradient(t, d);
    }
    std::vector<double> point_gradient(std::span<const double> t, const double& y) const { return inner.point_gradient(t, y); }
    double log_predictive_density(std::span<const double> t, const double& y) const { return inner.log_predictive_density(t, y); }
    bool is_feasible(std::span<const double> t) const { return inner.is_feasible(t); }
  };
  static_assert(GradientModel<GradOnly> && !ClosedFormModel<GradOnly>);
  const auto y = normal_data(30, 43);
  const auto s = posterior_bootstrap(GradOnly{}, y, normal_measure(0, 1), DpConfig{0.0, FixedTruncation{}},
                                     RestartPolicy{FixedInit{{5.0}}}, sampler(40, 3));
  for (std::size_t i = 0; i < s.rows(); ++i) {
    Rng rng = derive_sample_stream(3, i + 1);
    const auto d = draw_dp_posterior_dataset(y, normal_measure(0, 1), DpConfig{0.0, FixedTruncation{}}, rng);
    EXPECT_NEAR(s.at(i, 0), normal_location_minimizer(d), 1e-6);
  }
}

TEST(PosteriorBootstrap, MissingInitBlockIsConfigErrorBeforeWork) {
  RandomRestart rr;
  rr.R = 3;
  rr.init = InitSampler{{"pi", DirichletInit{1.0}}, {"mu", UniformInit{-1, 1}}};
  const std::vector<VectorPoint> y{{0.0}, {1.0}};
  EXPECT_THROW(posterior_bootstrap(GmmModel(2, 1), y, empirical_measure(y), DpConfig{}, RestartPolicy{rr}, sampler(10, 1)),
               ConfigError);
}

TEST(PosteriorBootstrap, FixedInitWrongWidthIsConfigError) {
  const auto y = normal_data(5, 44);
  EXPECT_THROW(posterior_bootstrap(NormalLocationModel(), y, normal_measure(0, 1), DpConfig{},
                                   RestartPolicy{FixedInit{{0.0, 1.0}}}, sampler(10, 1)),
               ConfigError);
}

TEST(PosteriorBootstrap, WorkerCountDoesNotChangeOutput) {
  Rng rng = make_stream(45);
  const auto pts = synthetic::sample_gmm(synthetic::toy_gmm_truth(), 120, rng);
  RandomRestart rr;
  rr.R = 3;
  rr.init = default_init_sampler(GmmModel(3, 1));
  const DpConfig dp{1.0, FixedTruncation{30}};
  const auto f = diag_normal_measure({2.0}, {4.0});
  const auto a = posterior_bootstrap(GmmModel(3, 1), pts, f, dp, RestartPolicy{rr}, sampler(24, 11, 1));
  const auto b = posterior_bootstrap(GmmModel(3, 1), pts, f, dp, RestartPolicy{rr}, sampler(24, 11, 4));
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.objectives, b.objectives);
  EXPECT_EQ(a.restart_index, b.restart_index);
  EXPECT_EQ(a.seeds, b.seeds);
}

TEST(PosteriorBootstrap, RandomRestartKeepsBestObjective) {
  Rng rng = make_stream(46);
  const auto pts = synthetic::sample_gmm(synthetic::toy_gmm_truth(), 100, rng);
  RandomRestart rr;
  rr.R = 6;
  rr.init = default_init_sampler(GmmModel(3, 1));
  const auto s = posterior_bootstrap(GmmModel(3, 1), pts, empirical_measure(pts), DpConfig{}, RestartPolicy{rr},
                                     sampler(10, 5));
  const GmmModel m(3, 1);
  for (std::size_t i = 0; i < s.rows(); ++i) {
    EXPECT_LT(s.restart_index[i], 6u);
    EXPECT_TRUE(m.is_feasible(s.row(i)));
    // every single restart from the same stream must be no better
    Rng srng = make_stream(s.seeds[i]);
    const auto d = draw_dp_posterior_dataset(pts, empirical_measure(pts), DpConfig{}, srng);
    EXPECT_NEAR(s.objectives[i], m.weighted_loss(s.row(i), d), 1e-9);
  }
}

TEST(PosteriorBootstrap, NoImprovementStopsEarly) {
  const auto y = normal_data(20, 47);
  RandomRestart rr;
  rr.R = 50;
  rr.stop_after_no_improvement = 1;
  rr.init = default_init_sampler(NormalLocationModel());
  Rng rng = make_stream(1);
  const DpConfig dp{};
  const auto d = draw_dp_posterior_dataset(y, normal_measure(0, 1), dp, rng);
  const auto o = detail::run_restarts(NormalLocationModel(), d, RestartPolicy{rr}, OptimConfig{}, rng, false);
  EXPECT_TRUE(o.ok);
  EXPECT_LT(o.restarts_run, 50u);
}

TEST(PosteriorBootstrap, TooManyFailuresIsNumericalError) {
  struct AlwaysFails {
    using point_type = double;
    std::size_t dimension() const { return 1; }
    std::string family() const { return "fails"; }
    std::vector<ParameterBlock> parameter_blocks() const { return {{"theta", 1}}; }
    std::vector<std::string> parameter_names() const { return {"theta"}; }
    double weighted_loss(std::span<const double>, const WeightedDataset<double>&) const { return 0.0; }
    std::vector<double> weighted_gradient(std::span<const double>, const WeightedDataset<double>&) const {
      throw NumericalError("boom");
    }
    std::vector<double> point_gradient(std::span<const double>, const double&) const { throw NumericalError("boom"); }
    double log_predictive_density(std::span<const double>, const double&) const { return 0.0; }
    bool is_feasible(std::span<const double>) const { return true; }
  };
  const auto y = normal_data(5, 48);
  EXPECT_THROW(posterior_bootstrap(AlwaysFails{}, y, normal_measure(0, 1), DpConfig{}, RestartPolicy{FixedInit{{0.0}}},
                                   sampler(20, 1)),
               NumericalError);
  SamplerConfig tolerant = sampler(20, 1);
  tolerant.max_failed_fraction = 0.99;
  EXPECT_THROW(posterior_bootstrap(AlwaysFails{}, y, normal_measure(0, 1), DpConfig{}, RestartPolicy{FixedInit{{0.0}}},
                                   tolerant),
               NumericalError);
}

TEST(PosteriorBootstrap, PriorPullsTowardCentering) {
  std::vector<double> y(50);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i % 2 == 0) ? 0.5 : 1.5;
  double prev = INFINITY;
  for (double alpha : {10.0, 100.0, 1000.0}) {
    const auto s = posterior_bootstrap(NormalLocationModel(), y, normal_measure(0, 2), DpConfig{alpha, FixedTruncation{1000}},
                                       RestartPolicy{FixedInit{{0.0}}}, sampler(400, 3, 0));
    const double m = oracle::mean(s.column(0));
    EXPECT_LT(m, prev);
    EXPECT_NEAR(m, 50.0 / (50.0 + alpha), 0.05);
    prev = m;
  }
}
