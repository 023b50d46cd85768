#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "npl/models/gmm.hpp"
#include "npl/models/logistic_ard.hpp"
#include "npl/models/normal_location.hpp"
#include "npl/synthetic.hpp"
#include "oracles.hpp"

using namespace npl;

namespace {

WeightedDataset<double> scalar_data(std::vector<double> y, std::vector<double> w) {
  WeightedDataset<double> d;
  d.n_observed = y.size();
  d.atoms = std::move(y);
  d.weights = std::move(w);
  return d;
}

WeightedDataset<VectorPoint> vector_data(const std::vector<double>& y, std::vector<double> w) {
  WeightedDataset<VectorPoint> d;
  for (double v : y) d.atoms.push_back({v});
  d.n_observed = y.size();
  d.weights = std::move(w);
  return d;
}

std::vector<double> uniform(std::size_t n) { return std::vector<double>(n, 1.0 / static_cast<double>(n)); }

}  // namespace

TEST(NormalLocation, MinimizerExamples) {
  EXPECT_DOUBLE_EQ(normal_location_minimizer(scalar_data({0, 2}, {0.5, 0.5})), 1.0);
  EXPECT_DOUBLE_EQ(normal_location_minimizer(scalar_data({3, 5}, {1, 0})), 3.0);
}

TEST(NormalLocation, MinimizerMatchesGridSearch) {
  Rng rng = make_stream(21);
  std::vector<double> y(7), w(7);
  for (auto& v : y) v = 4.0 * standard_normal(rng);
  for (auto& v : w) v = uniform01(rng);
  const double tw = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= tw;
  const auto d = scalar_data(y, w);
  const double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
  const int G = 100000;
  double best = lo, best_f = INFINITY;
  for (int g = 0; g <= G; ++g) {
    const double t = lo + (hi - lo) * g / G;
    double f = 0;
    for (int i = 0; i < 7; ++i) f += w[i] * (y[i] - t) * (y[i] - t);
    if (f < best_f) best_f = f, best = t;
  }
  EXPECT_NEAR(normal_location_minimizer(d), best, (hi - lo) / G);
}

TEST(NormalLocation, GradientAgreesWithFiniteDifferences) {
  NormalLocationModel m(2.0);
  const auto d = scalar_data({0.3, -1.0, 2.0}, {0.2, 0.5, 0.3});
  for (double t : {-2.0, 0.0, 0.7, 3.0}) {
    const auto fd = oracle::central_difference([&](const std::vector<double>& x) { return m.weighted_loss(x, d); }, {t});
    EXPECT_NEAR(m.weighted_gradient(std::vector<double>{t}, d)[0], fd[0], 1e-6);
  }
}

TEST(GmmLoss, StandardNormalAtMode) {
  GmmParams p(1, 1);
  p.mixing = {1.0};
  p.means = {0.0};
  p.variances = {1.0};
  EXPECT_NEAR(gmm_weighted_loss(p, vector_data({0.0}, {1.0})), 0.5 * std::log(2 * std::numbers::pi), 1e-12);
}

TEST(GmmLoss, UniformWeightsMatchNaiveLikelihood) {
  Rng rng = make_stream(22);
  const auto truth = synthetic::toy_gmm_truth();
  const auto pts = synthetic::sample_gmm(truth, 50, rng);
  std::vector<double> y;
  for (const auto& p : pts) y.push_back(p[0]);
  const oracle::Gmm1d g{truth.mixing, truth.means, truth.variances};
  EXPECT_NEAR(gmm_weighted_loss(truth, vector_data(y, uniform(50))), -oracle::loglik(g, y) / 50.0, 1e-12);
}

TEST(GmmLoss, ZeroWeightAnnihilatesExtremeAtom) {
  const auto truth = synthetic::toy_gmm_truth();
  const double a = gmm_weighted_loss(truth, vector_data({0.5, 1.5}, {0.5, 0.5}));
  const double b = gmm_weighted_loss(truth, vector_data({0.5, 1.5, 1e200}, {0.5, 0.5, 0.0}));
  EXPECT_EQ(a, b);
}

TEST(GmmLoss, NonFiniteNamesAtom) {
  const auto truth = synthetic::toy_gmm_truth();
  try {
    gmm_weighted_loss(truth, vector_data({0.5, INFINITY}, {0.5, 0.5}));
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("1"), std::string::npos);
  }
}

TEST(GmmEm, SingleComponentIsWeightedMoments) {
  GmmParams p(1, 1);
  p.mixing = {1.0};
  p.means = {5.0};
  p.variances = {3.0};
  const auto d = vector_data({1.0, 2.0, 4.0}, {0.5, 0.25, 0.25});
  const auto next = gmm_em_step(p, d);
  const double mu = 0.5 * 1 + 0.25 * 2 + 0.25 * 4;
  EXPECT_DOUBLE_EQ(next.mixing[0], 1.0);
  EXPECT_NEAR(next.means[0], mu, 1e-15);
  EXPECT_NEAR(next.variances[0], 0.5 * (1 - mu) * (1 - mu) + 0.25 * (2 - mu) * (2 - mu) + 0.25 * (4 - mu) * (4 - mu),
              1e-14);
}

TEST(GmmEm, UniformWeightStepMatchesTextbookEm) {
  Rng rng = make_stream(23);
  for (int inst = 0; inst < 10; ++inst) {
    const auto pts = synthetic::sample_gmm(synthetic::toy_gmm_truth(), 40, rng);
    std::vector<double> y;
    for (const auto& p : pts) y.push_back(p[0]);
    GmmParams p(3, 1);
    p.mixing = {0.2, 0.3, 0.5};
    p.means = {-1.0 + uniform01(rng), 2.0, 4.5};
    p.variances = {1.0, 0.5 + uniform01(rng), 2.0};
    const auto lib = gmm_em_step(p, vector_data(y, uniform(y.size())));
    const auto ref = oracle::em_step({p.mixing, p.means, p.variances}, y);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(lib.mixing[k], ref.pi[k], 1e-12);
      EXPECT_NEAR(lib.means[k], ref.mu[k], 1e-12);
      EXPECT_NEAR(lib.variances[k], ref.var[k], 1e-12);
    }
  }
}

TEST(GmmEm, WeightedLoglikNeverDecreases) {
  Rng rng = make_stream(24);
  const auto pts = synthetic::sample_gmm(synthetic::toy_gmm_truth(), 200, rng);
  WeightedDataset<VectorPoint> d;
  d.atoms = pts;
  d.n_observed = pts.size();
  d.weights = draw_dirichlet_weights(pts.size(), 0.0, 0, rng);
  GmmParams p(3, 1);
  p.mixing = {1 / 3.0, 1 / 3.0, 1 / 3.0};
  p.means = {-1, 0, 1};
  p.variances = {1, 1, 1};
  double prev = gmm_weighted_loglik(p, d);
  for (int it = 0; it < 200; ++it) {
    p = gmm_em_step(p, d);
    const double ll = gmm_weighted_loglik(p, d);
    ASSERT_GE(ll, prev - 1e-9) << "iteration " << it;
    prev = ll;
  }
}

TEST(GmmEm, StarvedComponentIsDegenerate) {
  GmmParams p(2, 1);
  p.mixing = {0.5, 0.5};
  p.means = {0.0, 1e6};
  p.variances = {1.0, 1e-6};
  EXPECT_THROW(gmm_em_step(p, vector_data({0.0, 0.1}, {0.5, 0.5})), DegenerateComponentError);
}

TEST(GmmEm, VarianceFloorApplies) {
  GmmParams p(1, 1);
  p.mixing = {1};
  p.means = {0};
  p.variances = {1};
  const auto next = gmm_em_step(p, vector_data({2.0, 2.0}, {0.5, 0.5}), 1e-3);
  EXPECT_EQ(next.variances[0], 1e-3);
}

TEST(GmmModel, FlatLayoutAndNames) {
  GmmModel m(3, 2);
  EXPECT_EQ(m.dimension(), 15u);
  const auto names = m.parameter_names();
  EXPECT_EQ(names.front(), "pi_1");
  EXPECT_EQ(names[3], "mu_1_1");
  EXPECT_EQ(names.back(), "sigma2_3_2");
  GmmModel m1(3, 1);
  EXPECT_EQ(m1.parameter_names()[3], "mu_1");
}

TEST(GmmModel, PredictiveDensityExamples) {
  GmmModel m(1, 1);
  EXPECT_NEAR(m.log_predictive_density(std::vector<double>{1.0, 0.0, 1.0}, {0.0}), -0.9189385332046727, 1e-12);
  const auto truth = synthetic::toy_gmm_truth();
  GmmModel m3(3, 1);
  const double lib = m3.log_predictive_density(truth.pack(), {4.0});
  EXPECT_NEAR(lib, std::log(oracle::mixture_density({truth.mixing, truth.means, truth.variances}, 4.0)), 1e-12);
}

TEST(Logistic, LossExamples) {
  LogisticArdModel m(2, ArdPenalty{1.0, 1.0, 0.0});
  WeightedDataset<LabeledPoint> d;
  d.atoms = {{1.0, {0.3, -2.0}}};
  d.weights = {1.0};
  d.n_observed = 1;
  EXPECT_NEAR(m.weighted_loss(std::vector<double>{0, 0, 0}, d), std::log(2.0), 1e-15);
  for (double a : {0.5, 1.0, 3.0})
    for (double b : {0.01, 1.0})
      for (double g : {0.0, 0.1, 10.0}) EXPECT_EQ(ArdPenalty({a, b, g}).value(std::vector<double>{0, 0}), 0.0);
}

TEST(Logistic, MatchesNaiveLossOracle) {
  Rng rng = make_stream(25);
  const std::size_t d = 4, n = 20;
  const ArdPenalty pen{1.5, 0.7, 0.05};
  LogisticArdModel m(d, pen);
  for (int rep = 0; rep < 20; ++rep) {
    WeightedDataset<LabeledPoint> data;
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < n; ++i) {
      LabeledPoint p{uniform01(rng) < 0.5 ? 0.0 : 1.0, std::vector<double>(d)};
      for (auto& v : p.x) v = standard_normal(rng);
      xs.push_back(p.x);
      ys.push_back(p.y);
      data.atoms.push_back(p);
    }
    data.weights = draw_dirichlet_weights(n, 0.0, 0, rng);
    data.n_observed = n;
    std::vector<double> theta(d + 1);
    for (auto& v : theta) v = standard_normal(rng);
    EXPECT_NEAR(m.weighted_loss(theta, data), oracle::logistic_loss(theta, xs, ys, data.weights, pen.a, pen.b, pen.gamma),
                1e-10);
  }
}

TEST(Logistic, GradientExamples) {
  LogisticArdModel m(2, ArdPenalty{1.0, 1.0, 0.0});
  WeightedDataset<LabeledPoint> d;
  d.atoms = {{1.0, {0.3, -2.0}}, {0.0, {1.5, 0.5}}, {1.0, {-1.0, 1.0}}};
  d.weights = {0.2, 0.5, 0.3};
  d.n_observed = 3;
  const auto g = m.weighted_gradient(std::vector<double>{0, 0, 0}, d);
  for (std::size_t j = 0; j < 2; ++j) {
    double ref = 0.0;
    for (std::size_t i = 0; i < 3; ++i) ref -= d.weights[i] * (d.atoms[i].y - 0.5) * d.atoms[i].x[j];
    EXPECT_NEAR(g[j], ref, 1e-15);
  }
  EXPECT_EQ(ArdPenalty({2.0, 0.5, 3.0}).derivative(0.0), 0.0);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  Rng rng = make_stream(26);
  const std::size_t d = 5;
  LogisticArdModel m(d, ArdPenalty{1.0, 0.3, 0.1});
  WeightedDataset<LabeledPoint> data;
  for (int i = 0; i < 30; ++i) {
    LabeledPoint p{uniform01(rng) < 0.4 ? 0.0 : 1.0, std::vector<double>(d)};
    for (auto& v : p.x) v = standard_normal(rng);
    data.atoms.push_back(p);
  }
  data.weights = draw_dirichlet_weights(30, 0.0, 0, rng);
  data.n_observed = 30;
  for (int rep = 0; rep < 25; ++rep) {
    std::vector<double> theta(d + 1);
    for (auto& v : theta) v = 2.0 * standard_normal(rng);
    const auto g = m.weighted_gradient(theta, data);
    const auto fd = oracle::central_difference([&](const std::vector<double>& x) { return m.weighted_loss(x, data); }, theta);
    for (std::size_t j = 0; j <= d; ++j) EXPECT_LE(std::abs(g[j] - fd[j]), 1e-5 * std::max(std::abs(fd[j]), 1e-3));
  }
}

TEST(Logistic, StableAtExtremePredictors) {
  LogisticArdModel m(1, ArdPenalty{1.0, 1.0, 0.0});
  WeightedDataset<LabeledPoint> d;
  d.atoms = {{1.0, {1.0}}, {0.0, {1.0}}};
  d.weights = {0.5, 0.5};
  d.n_observed = 2;
  const double f = m.weighted_loss(std::vector<double>{800.0, 0.0}, d);
  EXPECT_TRUE(std::isfinite(f));
  EXPECT_NEAR(f, 400.0, 1e-9);
}

TEST(Logistic, PredictiveDensity) {
  LogisticArdModel m(1, ArdPenalty{1.0, 1.0, 0.0});
  EXPECT_NEAR(m.log_predictive_density(std::vector<double>{0.0, 0.0}, LabeledPoint{1.0, {3.0}}), std::log(0.5), 1e-15);
}

TEST(Logistic, InvalidPenaltyIsConfigError) {
  EXPECT_THROW(LogisticArdModel(2, ArdPenalty{0.0, 1.0, 0.1}), ConfigError);
  EXPECT_THROW(LogisticArdModel(2, ArdPenalty{1.0, -1.0, 0.1}), ConfigError);
}
