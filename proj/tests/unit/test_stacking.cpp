#include "hybridml/stacking.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace hybridml::stacking {
namespace {

using learners::LearnerKind;

void blobs(Index n, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(n, 3);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    y(i) = static_cast<double>(i % 2);
    for (Index j = 0; j < 3; ++j) x(i, j) = normal(rng) + (y(i) > 0.5 ? 1.0 : -1.0);
  }
}

learners::LearnerConfigs small_configs() {
  learners::LearnerConfigs c;
  c.bnn.hidden = 4;
  c.bnn.epochs = 40;
  c.bnn.predict_samples = 20;
  c.rf.n_trees = 15;
  c.rf.max_depth = 4;
  c.gb.iterations = 10;
  return c;
}

TEST(Folds, BalancedAndDeterministic) {
  for (int k : {2, 3, 5, 10}) {
    for (Index n : {10, 23, 57}) {
      const auto folds = assign_folds(n, k, 9);
      std::vector<int> count(static_cast<std::size_t>(k), 0);
      for (int f : folds) {
        ASSERT_GE(f, 0);
        ASSERT_LT(f, k);
        ++count[static_cast<std::size_t>(f)];
      }
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      EXPECT_LE(*hi - *lo, 1);
      EXPECT_EQ(folds, assign_folds(n, k, 9));
    }
  }
  EXPECT_NE(assign_folds(40, 5, 1), assign_folds(40, 5, 2));
}

TEST(Oof, EachRowIsPredictedByAModelThatNeverSawIt) {
  Matrix x;
  Vector y;
  blobs(30, 3, x, y);
  const auto configs = small_configs();
  const std::vector<LearnerKind> kinds{LearnerKind::rf, LearnerKind::gb, LearnerKind::svm};
  for (int k : {2, 3, 5}) {
    for (std::uint64_t seed : {1u, 2u}) {
      const auto mf = oof_predictions(x, y, kinds, configs, k, seed);
      ASSERT_EQ(mf.fold_training_rows.size(), static_cast<std::size_t>(k));
      for (int f = 0; f < k; ++f) {
        const auto& rows = mf.fold_training_rows[static_cast<std::size_t>(f)];
        IndexList held;
        for (Index i = 0; i < x.rows(); ++i) {
          const bool in_train = std::find(rows.begin(), rows.end(), i) != rows.end();
          EXPECT_NE(in_train, mf.fold[static_cast<std::size_t>(i)] == f);
          if (!in_train) held.push_back(i);
        }
        // Refitting on exactly the recorded rows reproduces the held-out predictions.
        for (std::size_t m = 0; m < kinds.size(); ++m) {
          const auto model = learners::train(kinds[m], take_rows(x, rows), take_rows(y, rows), configs);
          const Vector p = learners::predict(model, take_rows(x, held));
          for (std::size_t r = 0; r < held.size(); ++r) {
            EXPECT_DOUBLE_EQ(mf.values(held[r], static_cast<Index>(m)), p(static_cast<Index>(r)));
          }
        }
      }
    }
  }
}

TEST(Oof, RandomLabelsAreNotMemorized) {
  Matrix x;
  Vector y;
  blobs(200, 4, x, y);
  Rng rng(5);
  std::bernoulli_distribution coin(0.5);
  for (Index i = 0; i < y.size(); ++i) y(i) = coin(rng) ? 1.0 : 0.0;
  auto configs = small_configs();
  configs.rf.max_depth = 20;
  configs.rf.n_trees = 30;
  const auto mf = oof_predictions(x, y, {LearnerKind::rf}, configs, 5, 6);
  const double oof_error = misclassification_rate(mf.values.col(0), y);
  const auto in_sample = learners::predict(learners::train(LearnerKind::rf, x, y, configs), x);
  EXPECT_LT(misclassification_rate(in_sample, y), 0.1);
  EXPECT_GT(oof_error, 0.35);
}

TEST(Oof, LeaveOneOut) {
  Matrix x;
  Vector y;
  blobs(10, 7, x, y);
  const auto mf = oof_predictions(x, y, {LearnerKind::gb}, small_configs(), 10, 1);
  std::set<int> seen(mf.fold.begin(), mf.fold.end());
  EXPECT_EQ(seen.size(), 10u);
  for (const auto& rows : mf.fold_training_rows) EXPECT_EQ(rows.size(), 9u);
  EXPECT_TRUE(mf.values.allFinite());
}

TEST(Oof, ConstantLabelsGiveTheBaseRate) {
  Matrix x;
  Vector y;
  blobs(12, 8, x, y);
  y.setOnes();
  const auto mf = oof_predictions(x, y, {LearnerKind::rf, LearnerKind::gb, LearnerKind::svm}, small_configs(), 3, 1);
  for (Index i = 0; i < y.size(); ++i) {
    EXPECT_DOUBLE_EQ(mf.values(i, 0), 1.0);
    // Boosting starts from the base rate clamped to [1e-6, 1 - 1e-6].
    EXPECT_NEAR(mf.values(i, 1), 1.0, 1e-6);
    EXPECT_DOUBLE_EQ(mf.values(i, 2), 1.0);
  }
  EXPECT_EQ(mf.base_rate_fills.size(), 3u);
}

TEST(Oof, RejectsTooFewRows) {
  Matrix x;
  Vector y;
  blobs(4, 1, x, y);
  EXPECT_THROW(oof_predictions(x, y, {LearnerKind::rf}, small_configs(), 5, 1), Error);
  EXPECT_THROW(oof_predictions(x, y, {LearnerKind::rf}, small_configs(), 1, 1), Error);
}

TEST(MetaLossTest, HandValues) {
  MetaModel avg = uniform_meta_model(2);
  const Matrix f = Matrix::Constant(4, 2, 0.5);
  const Vector ones = Vector::Ones(4);
  EXPECT_DOUBLE_EQ(meta_loss(avg, f, ones).sum, 1.0);
  EXPECT_DOUBLE_EQ(meta_loss(avg, f, ones).mean, 0.25);

  MetaModel zero = uniform_meta_model(2);
  zero.coefficients.setZero();
  Vector y(4);
  y << 1, 0, 1, 1;
  EXPECT_DOUBLE_EQ(meta_loss(zero, f, y).sum, y.squaredNorm());
}

TEST(MetaLossTest, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix f(25, 4);
  Vector y(25);
  for (Index i = 0; i < f.size(); ++i) f(i) = u(rng);
  for (Index i = 0; i < y.size(); ++i) y(i) = u(rng) < 0.5 ? 0.0 : 1.0;
  MetaModel m = uniform_meta_model(4);
  Vector p(5);
  for (Index i = 0; i < 5; ++i) p(i) = u(rng) - 0.5;
  m.set_parameters(p);
  const Vector g = meta_loss_gradient(m, f, y);
  const double h = 1e-6;
  for (Index i = 0; i < 5; ++i) {
    MetaModel up = m, down = m;
    Vector pu = p, pd = p;
    pu(i) += h;
    pd(i) -= h;
    up.set_parameters(pu);
    down.set_parameters(pd);
    const double fd = (meta_loss(up, f, y).sum - meta_loss(down, f, y).sum) / (2 * h);
    EXPECT_NEAR(g(i), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(MetaTrain, RecoversAPlantedLinearMap) {
  Rng rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix f(80, 3);
  for (Index i = 0; i < f.size(); ++i) f(i) = u(rng);
  Vector c(3);
  c << 0.5, -0.2, 0.4;
  const double b = 0.1;
  const Vector y = (f * c).array() + b;
  MetaConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.epochs = 20000;
  cfg.stop_when_converged = false;
  const auto fit = meta_train(f, y, cfg);
  EXPECT_LT((fit.model.coefficients - c).cwiseAbs().maxCoeff(), 1e-3);
  EXPECT_NEAR(fit.model.intercept, b, 1e-3);
  EXPECT_LT(fit.trace.loss.back(), 1e-6);
}

TEST(MetaTrain, ZeroLearningRateKeepsTheAverage) {
  Matrix f;
  Vector y;
  blobs(20, 13, f, y);
  MetaConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 50;
  const auto fit = meta_train(f, y, cfg);
  const double first = fit.trace.loss.front();
  for (double l : fit.trace.loss) EXPECT_EQ(l, first);
  EXPECT_EQ(fit.model.parameters(), uniform_meta_model(3).parameters());
}

TEST(MetaTrain, SmallStepsDescendMonotonically) {
  Rng rng(14);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix f(60, 4);
  Vector y(60);
  for (Index i = 0; i < f.size(); ++i) f(i) = u(rng);
  for (Index i = 0; i < y.size(); ++i) y(i) = f(i, 0) + 0.3 * u(rng) > 0.6 ? 1.0 : 0.0;
  MetaConfig cfg;
  cfg.learning_rate = 1e-4;
  cfg.half_life = 0.0;
  cfg.epochs = 500;
  cfg.stop_when_converged = false;
  const auto trace = meta_train(f, y, cfg).trace.loss;
  ASSERT_EQ(trace.size(), 500u);
  for (std::size_t t = 1; t < trace.size(); ++t) EXPECT_LE(trace[t], trace[t - 1] + 1e-12) << "epoch " << t;
}

TEST(MetaTrain, WindowedMeans) {
  const auto m = windowed_means({4, 2, 6, 8}, 2);
  // One entry per complete window.
  ASSERT_EQ(m.size(), 3u);
  EXPECT_DOUBLE_EQ(m[0], 3.0);
  EXPECT_DOUBLE_EQ(m[1], 4.0);
  EXPECT_DOUBLE_EQ(m[2], 7.0);
  EXPECT_TRUE(windowed_means({1, 2}, 3).empty());
}

TEST(StackPredict, AverageAndIndicatorModels) {
  Vector a(3), b(3);
  a << 0.1, 0.5, 0.9;
  b << 0.3, 0.7, 0.2;
  const Vector avg = stack_predict(uniform_meta_model(2), {a, b});
  EXPECT_LT((avg - 0.5 * (a + b)).cwiseAbs().maxCoeff(), 1e-15);
  MetaModel pick = uniform_meta_model(2);
  pick.coefficients << 0.0, 1.0;
  EXPECT_EQ(stack_predict(pick, {a, b}), b);
  pick.intercept = 5.0;
  EXPECT_EQ(stack_predict(pick, {a, b}), Vector::Ones(3));
}

}  // namespace
}  // namespace hybridml::stacking
