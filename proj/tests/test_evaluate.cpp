#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "npl/npl.hpp"
#include "npl/synthetic.hpp"
#include "oracles.hpp"

using namespace npl;

namespace {

PosteriorSamples make_samples(std::vector<std::string> names, std::vector<double> values) {
  PosteriorSamples s;
  s.names = std::move(names);
  s.values = std::move(values);
  s.requested = s.rows();
  return s;
}

}  // namespace

TEST(LogSumExpTest, MatchesNaiveAndHandlesExtremes) {
  const std::vector<double> v{-1.0, 0.5, 2.0};
  EXPECT_NEAR(log_sum_exp(v), std::log(std::exp(-1.0) + std::exp(0.5) + std::exp(2.0)), 1e-15);
  const std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
  const std::vector<double> neg{-INFINITY, -INFINITY};
  EXPECT_EQ(log_sum_exp(neg), -INFINITY);
}

TEST(MeanLppd, DensityOneGivesZero) {
  // logistic with a huge intercept predicts y=1 with probability 1
  LogisticArdModel m(1, ArdPenalty{1, 1, 0});
  const auto s = make_samples({"beta_1", "intercept"}, {0.0, 800.0});
  EXPECT_EQ(mean_lppd(m, s, {LabeledPoint{1.0, {0.3}}}), 0.0);
}

TEST(MeanLppd, TinyCaseMatchesNaiveSum) {
  GmmModel m(1, 1);
  const auto s = make_samples({"pi_1", "mu_1", "sigma2_1"}, {1, 0.0, 1.0, 1, 0.5, 2.0, 1, -0.3, 0.7});
  const std::vector<VectorPoint> test{{0.2}, {-1.1}};
  double ref = 0.0;
  for (const auto& y : test) {
    double p = 0.0;
    for (int b = 0; b < 3; ++b) p += oracle::normal_pdf(y[0], s.at(b, 1), s.at(b, 2));
    ref += std::log(p / 3.0);
  }
  EXPECT_NEAR(mean_lppd(m, s, test), ref / 2.0, 1e-12);
}

TEST(MeanLppd, UnderflowIsNumericalError) {
  GmmModel m(1, 1);
  const auto s = make_samples({"pi_1", "mu_1", "sigma2_1"}, {1, 0.0, 1e-6});
  EXPECT_TRUE(std::isfinite(mean_lppd(m, s, {VectorPoint{1e10}})));  // log space: finite inputs never underflow
  EXPECT_THROW(mean_lppd(m, s, {VectorPoint{INFINITY}}), NumericalError);
}

TEST(MseAccuracyTest, PerfectAndConstantPredictors) {
  LogisticArdModel m(1, ArdPenalty{1, 1, 0});
  // beta large positive: p = 1 for x > 0, 0 for x < 0
  const auto perfect = make_samples({"beta_1", "intercept"}, {800.0, 0.0});
  const std::vector<LabeledPoint> test{{1, {1.0}}, {0, {-1.0}}, {1, {2.0}}, {0, {-0.5}}};
  const auto r = mse_and_accuracy(m, perfect, test);
  EXPECT_EQ(r.mse, 0.0);
  EXPECT_EQ(r.accuracy_percent, 100.0);
  const auto flat = make_samples({"beta_1", "intercept"}, {0.0, 0.0});
  EXPECT_DOUBLE_EQ(mse_and_accuracy(m, flat, test).mse, 0.25);
}

TEST(MseAccuracyTest, MatchesNaiveOracle) {
  Rng rng = make_stream(51);
  auto data = synthetic::genotype_like(200, rng, 40);
  std::vector<double> vals;
  for (int b = 0; b < 7; ++b)
    for (int j = 0; j <= 40; ++j) vals.push_back(0.3 * standard_normal(rng));
  std::vector<std::string> names(41, "c");
  const auto s = make_samples(names, vals);
  LogisticArdModel m(40, ArdPenalty{1, 1, 0});
  double se = 0.0;
  int correct = 0;
  for (const auto& p : data) {
    double prob = 0.0;
    for (int b = 0; b < 7; ++b) {
      double z = s.at(b, 40);
      for (int j = 0; j < 40; ++j) z += s.at(b, j) * p.x[j];
      prob += 1.0 / (1.0 + std::exp(-z));
    }
    prob /= 7.0;
    se += (prob - p.y) * (prob - p.y);
    correct += ((prob >= 0.5) == (p.y == 1.0));
  }
  const auto r = mse_and_accuracy(m, s, data);
  EXPECT_NEAR(r.mse, se / 200.0, 1e-12);
  EXPECT_NEAR(r.accuracy_percent, 100.0 * correct / 200.0, 1e-12);
}

TEST(Sparsity, Examples) {
  const auto zeros = make_samples({"a", "b", "c"}, {0, 0, 0, 0, 0, 0});
  EXPECT_EQ(sparsity_fraction(zeros, 3, 0.1), 100.0);
  const auto two = make_samples({"beta_1", "beta_2", "intercept"}, {0.05, 0.2, 9.0});
  EXPECT_EQ(sparsity_fraction(two, 2, 0.1), 50.0);
}

TEST(Sparsity, MatchesDirectRecomputation) {
  Rng rng = make_stream(52);
  std::vector<double> v;
  for (int i = 0; i < 60; ++i) v.push_back(0.2 * standard_normal(rng));
  const auto s = make_samples({"a", "b", "c", "d", "e", "f"}, v);
  int count = 0;
  for (int j = 0; j < 5; ++j) {
    double m = 0;
    for (int b = 0; b < 10; ++b) m += v[b * 6 + j];
    count += std::abs(m / 10) < 0.05;
  }
  EXPECT_DOUBLE_EQ(sparsity_fraction(s, 5, 0.05), 100.0 * count / 5.0);
}

TEST(Summary, NearestRankByHand) {
  std::vector<double> v{5, 3, 9, 1, 2, 8, 4, 10, 7, 6};
  const auto s = summarize(v, 0.8);
  EXPECT_EQ(s.lower, 1.0);
  EXPECT_EQ(s.upper, 9.0);
  EXPECT_EQ(s.median, 5.0);
  EXPECT_DOUBLE_EQ(s.mean, 5.5);
}

TEST(Summary, ConstantSamples) {
  const auto s = summarize(std::vector<double>(17, 2.5), 0.8);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_EQ(s.median, 2.5);
  EXPECT_EQ(s.lower, 2.5);
  EXPECT_EQ(s.upper, 2.5);
}

TEST(Summary, SymmetricSamples) {
  Rng rng = make_stream(53);
  std::vector<double> v;
  for (int i = 0; i < 50; ++i) {
    const double x = std::abs(standard_normal(rng));
    v.push_back(x);
    v.push_back(-x);
  }
  const auto s = summarize(v, 0.8);
  const double xmax = *std::max_element(v.begin(), v.end());
  EXPECT_GE(s.median, -xmax);
  EXPECT_LE(s.median, xmax);
  // Nearest ranks ceil(B(1-q)/2) and ceil(B(1+q)/2) are not mirror images,
  // so symmetry holds up to one order statistic.
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_LE(s.lower, 0.0);
  EXPECT_GE(s.upper, 0.0);
  EXPECT_EQ(s.lower, -sorted[sorted.size() - 10]);
  EXPECT_EQ(s.upper, sorted[89]);
  EXPECT_LE(-s.lower - s.upper, sorted[90] - sorted[89]);
}

TEST(Summary, MatchesSortOracle) {
  Rng rng = make_stream(54);
  for (std::size_t B : {2u, 7u, 33u, 100u, 1001u}) {
    std::vector<double> v(B);
    for (auto& x : v) x = standard_normal(rng);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const auto s = summarize(v, 0.9);
    // ranks computed in exact integer arithmetic: ceil(B*q) with q = k/20
    auto rank = [&](std::size_t num, std::size_t den) { return std::max<std::size_t>(1, (B * num + den - 1) / den); };
    EXPECT_EQ(s.lower, sorted[rank(1, 20) - 1]);
    EXPECT_EQ(s.upper, sorted[rank(19, 20) - 1]);
    EXPECT_EQ(s.median, sorted[rank(1, 2) - 1]);
  }
}

TEST(Snis, SingleDrawHasUnitEss) {
  Rng rng = make_stream(55);
  const std::vector<double> y{0.1, -0.3};
  const auto r = snis_mean_lppd(NormalLocationModel(), NormalParameterDensity{0, 1}, NormalParameterDensity{0, 4}, y, y, 1, rng);
  EXPECT_NEAR(r.ess, 1.0, 1e-12);
}

TEST(Snis, ConjugateProposalGivesFullEss) {
  Rng rng = make_stream(56);
  std::vector<double> y(30);
  for (auto& v : y) v = 1.0 + standard_normal(rng);
  const double n = 30, sum = std::accumulate(y.begin(), y.end(), 0.0);
  const NormalParameterDensity prior{0.0, 1.0};
  const NormalParameterDensity posterior{sum / (n + 1.0), 1.0 / (n + 1.0)};
  const std::size_t B = 5000;
  const auto r = snis_mean_lppd(NormalLocationModel(), prior, posterior, y, y, B, rng);
  EXPECT_NEAR(r.ess, static_cast<double>(B), 1e-9 * B);
  EXPECT_NEAR(r.weight_sum, 1.0, 1e-12);
}

TEST(Sweep, LogCStrictlyDecreasingOnDefaultGrid) {
  SweepConfig c;
  c.b_grid = geometric_b_grid();
  ASSERT_EQ(c.b_grid.size(), 450u);
  EXPECT_EQ(c.b_grid[0], 1.0);
  for (std::size_t t = 1; t < 450; ++t) EXPECT_LT(c.log_c(t), c.log_c(t - 1));
}

TEST(Sweep, SinglePointEqualsBootstrapPlusSummary) {
  Rng rng = make_stream(57);
  const auto data = synthetic::genotype_like(60, rng, 40);
  SweepConfig sw;
  sw.b_grid = {0.5};
  sw.samples_per_point = 12;
  SamplerConfig cfg;
  cfg.master_seed = 99;
  cfg.workers = 2;
  const RestartPolicy policy{FixedInit{std::vector<double>(41, 0.0)}};
  const auto f = empirical_measure(data);
  const auto r = sparsity_path_sweep(40, data, f, DpConfig{}, policy, sw, cfg);
  ASSERT_EQ(r.points.size(), 1u);
  EXPECT_FALSE(r.any_failed);

  SamplerConfig direct = cfg;
  direct.B = 12;
  direct.master_seed = derive_seed(99, {0x5357454550ULL, 1});
  const auto model = LogisticArdModel(40, ArdPenalty{1.0, 0.5, 1.0 / 60});
  const auto s = posterior_bootstrap(model, data, f, DpConfig{}, policy, direct);
  const auto sum = posterior_summary(s, 0.8);
  for (std::size_t j = 0; j < 40; ++j) {
    EXPECT_EQ(r.points[0].coefficients[j].median, sum[j].median);
    EXPECT_EQ(r.points[0].coefficients[j].lower, sum[j].lower);
    EXPECT_EQ(r.points[0].coefficients[j].upper, sum[j].upper);
  }
}
