#include "hybridml/learners/gbm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

namespace hybridml::learners {
namespace {

// x ~ U(-1, 1), y = 1[x > 0.2].
void threshold_data(Index n, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  x.resize(n, 1);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = unif(rng);
    y(i) = x(i, 0) > 0.2 ? 1.0 : 0.0;
  }
}

double summed_loss(const Vector& f, const Vector& y) {
  double s = 0.0;
  for (Index i = 0; i < f.size(); ++i) s += std::log1p(std::exp(-std::abs(f(i)))) + std::max(f(i), 0.0) - y(i) * f(i);
  return s;
}

TEST(Gbm, LogisticLossAtZeroIsLog2) {
  Vector y(4);
  y << 0, 1, 1, 0;
  EXPECT_NEAR(logistic_loss(Vector::Zero(4), y), std::log(2.0), 1e-15);
}

TEST(Gbm, NoStagesPredictTheBaseRate) {
  Matrix x;
  Vector y;
  threshold_data(50, 1, x, y);
  GbmConfig cfg;
  cfg.iterations = 0;
  const GbmModel m = gb_train(x, y, cfg);
  const Vector p = m.predict_proba(x);
  EXPECT_LT((p.array() - y.mean()).abs().maxCoeff(), 1e-12);
}

TEST(Gbm, LearnsAThreshold) {
  Matrix x, xv;
  Vector y, yv;
  threshold_data(300, 2, x, y);
  threshold_data(300, 3, xv, yv);
  GbmConfig cfg;
  cfg.iterations = 50;
  const GbmModel m = gb_train(x, y, cfg);
  EXPECT_GE(1.0 - misclassification_rate(m.predict_proba(xv), yv), 0.95);
}

TEST(Gbm, EveryAcceptedStepSatisfiesArmijoAndLossNeverRises) {
  Matrix x;
  Vector y;
  threshold_data(200, 4, x, y);
  Rng rng(5);
  std::bernoulli_distribution flip(0.1);
  for (Index i = 0; i < y.size(); ++i) {
    if (flip(rng)) y(i) = 1.0 - y(i);
  }
  GbmConfig cfg;
  cfg.iterations = 60;
  cfg.max_depth = 3;
  const GbmModel m = gb_train(x, y, cfg);
  ASSERT_EQ(m.loss_trace.size(), m.stages.size() + 1);
  for (std::size_t t = 1; t < m.loss_trace.size(); ++t) EXPECT_LE(m.loss_trace[t], m.loss_trace[t - 1]);

  Vector f = Vector::Constant(y.size(), m.initial_score);
  for (const auto& stage : m.stages) {
    const Vector h = stage.tree.predict(x);
    double slope = 0.0;
    for (Index i = 0; i < y.size(); ++i) slope += (1.0 / (1.0 + std::exp(-f(i))) - y(i)) * h(i);
    EXPECT_LT(slope, 0.0);
    EXPECT_LE(summed_loss(f + stage.step * h, y), summed_loss(f, y) + cfg.armijo_c1 * stage.step * slope + 1e-9);
    f += m.shrinkage * stage.step * h;
  }
  EXPECT_LT((f - m.decision(x)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LineSearch, RejectsAscentDirections) {
  Vector y(3);
  y << 1, 1, 0;
  const Vector f = Vector::Zero(3);
  Vector up(3);
  up << -1, -1, 1;
  EXPECT_FALSE(armijo_wolfe_search(f, up, y, 1e-4, 0.9, 50).armijo);
  const auto down = armijo_wolfe_search(f, -up, y, 1e-4, 0.9, 50);
  EXPECT_TRUE(down.armijo);
  EXPECT_GT(down.step, 0.0);
  EXPECT_TRUE(down.wolfe_curvature);
}

TEST(RegressionTree, DepthOneFitsAStep) {
  Matrix x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  Vector t(6);
  t << -1, -1, -1, 2, 2, 2;
  IndexList rows(6);
  std::iota(rows.begin(), rows.end(), Index{0});
  const RegressionTree tree = fit_regression_tree(x, t, rows, 1, 1);
  EXPECT_LT((tree.predict(x) - t).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Gbm, SubsamplingIsSeeded) {
  Matrix x;
  Vector y;
  threshold_data(120, 6, x, y);
  GbmConfig cfg;
  cfg.iterations = 20;
  cfg.subsample = 0.5;
  const Vector a = gb_train(x, y, cfg).decision(x);
  EXPECT_EQ(a, gb_train(x, y, cfg).decision(x));
  cfg.seed = 2;
  EXPECT_NE(a, gb_train(x, y, cfg).decision(x));
}

TEST(Gbm, RejectsBadConfig) {
  Matrix x;
  Vector y;
  threshold_data(20, 1, x, y);
  GbmConfig cfg;
  cfg.shrinkage = 0.0;
  EXPECT_THROW(gb_train(x, y, cfg), Error);
  cfg = GbmConfig{};
  cfg.subsample = 1.5;
  EXPECT_THROW(gb_train(x, y, cfg), Error);
}

TEST(Gbm, SaveLoadRoundTrip) {
  Matrix x;
  Vector y;
  threshold_data(80, 7, x, y);
  GbmConfig cfg;
  cfg.iterations = 10;
  const GbmModel m = gb_train(x, y, cfg);
  std::stringstream buffer;
  m.save(buffer);
  const GbmModel r = GbmModel::load(buffer);
  EXPECT_EQ(r.decision(x), m.decision(x));
  EXPECT_EQ(r.stages.size(), m.stages.size());
  EXPECT_EQ(r.initial_score, m.initial_score);
  // Training diagnostics are not part of the model file.
  EXPECT_TRUE(r.loss_trace.empty());
}

}  // namespace
}  // namespace hybridml::learners
