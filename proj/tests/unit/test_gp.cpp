#include "hybridml/hyperopt/gp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace hybridml::hyperopt {
namespace {

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double monte_carlo_ei(double mean, double std, double f_star, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(mean, std);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += std::max(f_star - normal(rng), 0.0);
  return sum / n;
}

TEST(ExpectedImprovement, ClosedFormValues) {
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0), 0.39894228, 1e-8);
  EXPECT_NEAR(expected_improvement(-0.5, 0.5, 0.0), 0.5 * (normal_cdf(1.0) + normal_pdf(1.0)), 1e-12);
  EXPECT_NEAR(expected_improvement(-0.5, 0.5, 0.0), 0.5417, 1e-4);
  EXPECT_EQ(expected_improvement(0.3, 0.0, 1.0), 0.7);
  EXPECT_EQ(expected_improvement(1.3, 0.0, 1.0), 0.0);
}

TEST(ExpectedImprovement, AgreesWithMonteCarlo) {
  const double cases[][3] = {{0.0, 1.0, 0.0}, {-0.5, 0.5, 0.0}, {1.0, 0.3, 0.5}, {2.0, 2.0, -1.0}};
  std::uint64_t seed = 1;
  for (const auto& c : cases) {
    const double mc = monte_carlo_ei(c[0], c[1], c[2], seed++);
    // Standard error of the MC mean is below std / sqrt(1e5) ~ 0.0063 std.
    EXPECT_NEAR(expected_improvement(c[0], c[1], c[2]), mc, 4.0 * c[1] / std::sqrt(1e5));
  }
}

TEST(ExpectedImprovement, NonnegativeAndIncreasingInStd) {
  for (double gap : {-3.0, -0.5, 0.0, 0.5, 3.0}) {
    double last = -1.0;
    for (double s = 0.0; s <= 3.0; s += 0.05) {
      const double ei = expected_improvement(0.0, s, gap);
      EXPECT_GE(ei, 0.0);
      EXPECT_GE(ei, last - 1e-15);
      last = ei;
    }
  }
}

Matrix unit_points(Index n, Index d, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix x(n, d);
  for (Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  return x;
}

Vector smooth(const Matrix& x) {
  Vector f(x.rows());
  for (Index i = 0; i < x.rows(); ++i) f(i) = std::sin(6.0 * x(i, 0)) + 0.5 * x.row(i).squaredNorm();
  return f;
}

TEST(Gp, InterpolatesAndRevertsToThePrior) {
  Rng rng(2);
  const Matrix x = unit_points(12, 2, rng);
  const Vector f = smooth(x);
  const auto gp = gp_fit_fixed(x, f, 0.3, 1.0, GpConfig{});
  for (Index i = 0; i < x.rows(); ++i) {
    const auto p = gp.posterior(x.row(i).transpose());
    EXPECT_NEAR(p.mean, f(i), 1e-3);
    EXPECT_LT(p.std, 0.01);
  }
  const auto far = gp.posterior(Vector::Constant(2, 50.0));
  EXPECT_NEAR(far.mean, f.mean(), 1e-12);
  EXPECT_NEAR(far.std, 1.0, 1e-12);
  EXPECT_THROW(gp_fit(x.topRows(1), f.head(1), GpConfig{}), Error);
}

TEST(Gp, IdenticalPointsNeedJitter) {
  Matrix x(2, 1);
  x << 0.4, 0.4;
  Vector f(2);
  f << 1.0, 1.0;
  GpConfig cfg;
  cfg.noise_variance = 0.0;
  const auto gp = gp_fit(x, f, cfg);
  EXPECT_GT(gp.jitter, 0.0);
  EXPECT_LE(gp.jitter, cfg.max_jitter);
  EXPECT_NEAR(gp.posterior(x.row(0).transpose()).mean, 1.0, 1e-9);
}

TEST(Gp, IncrementalExtensionMatchesARefit) {
  Rng rng(3);
  const Matrix x = unit_points(15, 3, rng);
  const Vector f = smooth(x);
  auto gp = gp_fit_fixed(x.topRows(8), f.head(8), 0.4, 1.5, GpConfig{});
  for (Index i = 8; i < 15; ++i) ASSERT_TRUE(gp_extend(gp, x.row(i).transpose(), f(i)));
  const auto full = gp_fit_fixed(x, f, 0.4, 1.5, GpConfig{});
  EXPECT_NEAR(gp.prior_mean, full.prior_mean, 1e-12);
  EXPECT_LT((gp.chol - full.chol).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((gp.weights - full.weights).cwiseAbs().maxCoeff(), 1e-8);
  const Matrix probes = unit_points(20, 3, rng);
  for (Index i = 0; i < probes.rows(); ++i) {
    const auto a = gp.posterior(probes.row(i).transpose());
    const auto b = full.posterior(probes.row(i).transpose());
    EXPECT_NEAR(a.mean, b.mean, 1e-8);
    EXPECT_NEAR(a.std, b.std, 1e-8);
  }
}

TEST(Gp, ExtensionRefusesADuplicatePoint) {
  Rng rng(4);
  const Matrix x = unit_points(5, 1, rng);
  GpConfig cfg;
  cfg.noise_variance = 0.0;
  cfg.initial_jitter = 0.0;
  auto gp = gp_fit_fixed(x, smooth(x), 0.3, 1.0, cfg);
  const Matrix before = gp.chol;
  EXPECT_FALSE(gp_extend(gp, x.row(2).transpose(), 0.0));
  EXPECT_EQ(gp.chol, before);
  EXPECT_EQ(gp.size(), 5);
}

TEST(Gp, PosteriorVarianceIsNonnegative) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = unit_points(25, 2, rng);
    const auto gp = gp_fit(x, smooth(x), GpConfig{});
    const Matrix probes = unit_points(50, 2, rng);
    for (Index i = 0; i < x.rows(); ++i) EXPECT_GE(gp.posterior(x.row(i).transpose()).raw_variance, -1e-12);
    for (Index i = 0; i < probes.rows(); ++i) {
      const auto p = gp.posterior(probes.row(i).transpose());
      EXPECT_GE(p.raw_variance, -1e-12);
      EXPECT_GE(p.std, 0.0);
    }
  }
}

TEST(Gp, RecoversTheGeneratingLengthScale) {
  // Draws from an SE prior with length-scale 0.2 on 30 points of [0,1].
  const double ell = 0.2;
  const GpConfig cfg;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const Matrix x = unit_points(30, 1, rng);
    Matrix k(30, 30);
    for (Index i = 0; i < 30; ++i) {
      for (Index j = 0; j < 30; ++j) k(i, j) = std::exp(-0.5 * std::pow((x(i) - x(j)) / ell, 2));
    }
    k.diagonal().array() += 1e-8;
    const Matrix l = k.llt().matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);
    Vector z(30);
    for (Index i = 0; i < 30; ++i) z(i) = normal(rng);
    const auto gp = gp_fit(x, l * z, cfg);
    EXPECT_GE(gp.length_scale, 0.13) << "seed " << seed;
    EXPECT_LE(gp.length_scale, 0.32) << "seed " << seed;
  }
}

}  // namespace
}  // namespace hybridml::hyperopt
