#include "hybridml/adam.hpp"
#include "hybridml/common.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

namespace hybridml {
namespace {

TEST(Common, PearsonMatchesHandComputation) {
  Vector a(3), b(3);
  a << 1, 2, 3;
  b << 1, 2, 4;
  // cov = 3 / 3, var_a = 2/3, var_b = 14/9 (population); r = 1 / sqrt(2/3 * 14/9).
  EXPECT_NEAR(pearson(a, b), 1.0 / std::sqrt(2.0 / 3.0 * 14.0 / 9.0), 1e-15);
  EXPECT_NEAR(pearson(a, b), 0.9820, 1e-4);
  EXPECT_DOUBLE_EQ(pearson(a, -a), -1.0);
  EXPECT_DOUBLE_EQ(pearson(a, Vector::Constant(3, 2.0)), 0.0);
}

TEST(Common, SigmoidAndSoftplusStayFiniteAtExtremes) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 0.0);
  EXPECT_NEAR(sigmoid(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-50.0), std::exp(-50.0), 1e-30);
  EXPECT_NEAR(softplus(1.0), std::log1p(std::exp(1.0)), 1e-15);
}

TEST(Common, ErrorMetrics) {
  Vector p(4), y(4);
  p << 0.9, 0.2, 0.5, 0.4;
  y << 1, 0, 0, 1;
  // 0.5 counts as class 1, so rows 2 and 3 are wrong.
  EXPECT_DOUBLE_EQ(misclassification_rate(p, y), 0.5);
  EXPECT_NEAR(brier_score(p, y), (0.01 + 0.04 + 0.25 + 0.36) / 4.0, 1e-15);
}

TEST(Common, DeriveSeedGivesDistinctStreams) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 1000; ++s) seen.insert(derive_seed(42, s));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 1));
}

TEST(Common, ErrorMessageIsModuleQualified) {
  const Error e("ensemble", "bad weights");
  EXPECT_STREQ(e.what(), "ensemble: bad weights");
  EXPECT_EQ(e.module(), "ensemble");
}

TEST(Common, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(x)), x);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  AdamState adam;
  adam.reset(2);
  Vector g(2);
  g << 3.0, -0.01;
  const Vector step = adam.step_for(g, 0.1);
  // Bias correction makes the first step lr * g / (|g| + eps') for each coordinate.
  EXPECT_NEAR(step(0), 0.1, 1e-8);
  EXPECT_NEAR(step(1), -0.1, 1e-6);
  EXPECT_EQ(adam.step, 1);
}

TEST(Adam, MinimizesAQuadratic) {
  AdamState adam;
  adam.reset(1);
  Vector x = Vector::Constant(1, 5.0);
  for (int t = 0; t < 5000; ++t) x -= adam.step_for(2.0 * (x.array() - 1.0).matrix(), 0.01);
  EXPECT_NEAR(x(0), 1.0, 1e-3);
}

}  // namespace
}  // namespace hybridml
