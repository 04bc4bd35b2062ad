#include "hybridml/learners/forest.hpp"

#include <gtest/gtest.h>

#include <array>
#include <sstream>

namespace hybridml::learners {
namespace {

TEST(Gini, KnownValues) {
  const std::array<double, 2> even{5, 5}, pure{10, 0}, skew{7, 3};
  EXPECT_DOUBLE_EQ(gini_impurity(even), 0.5);
  EXPECT_DOUBLE_EQ(gini_impurity(pure), 0.0);
  EXPECT_NEAR(gini_impurity(skew), 1.0 - 0.49 - 0.09, 1e-15);
}

TEST(Gini, RejectsEmptyOrNegativeCounts) {
  const std::array<double, 2> empty{0, 0}, negative{-1, 3};
  EXPECT_THROW(gini_impurity(empty), Error);
  EXPECT_THROW(gini_impurity(negative), Error);
}

TEST(ErrorBound, KnownValues) {
  EXPECT_NEAR(rf_error_bound(1.0, 0.8), 0.2, 1e-15);
  EXPECT_NEAR(rf_error_bound(0.0, 0.8), 0.8, 1e-15);
  EXPECT_NEAR(rf_error_bound(0.5, 0.6), 0.5, 1e-15);
}

TEST(Importance, NormalizesRawDecreases) {
  Vector raw(3);
  raw << 2, 1, 1;
  const auto imp = normalize_importance(raw);
  EXPECT_DOUBLE_EQ(imp.importance(0), 0.5);
  EXPECT_DOUBLE_EQ(imp.importance(1), 0.25);
  EXPECT_DOUBLE_EQ(imp.importance(2), 0.25);
  EXPECT_FALSE(imp.uniform_fallback);
  const auto flat = normalize_importance(Vector::Zero(4));
  EXPECT_TRUE(flat.uniform_fallback);
  EXPECT_DOUBLE_EQ(flat.importance.sum(), 1.0);
}

// Column 0 decides the label; the other columns are noise.
void one_informative(Index n, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(n, 4);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 4; ++j) x(i, j) = normal(rng);
    y(i) = x(i, 0) > 0.0 ? 1.0 : 0.0;
  }
}

TEST(Forest, SingleInformativeFeatureDominatesImportance) {
  Matrix x;
  Vector y;
  one_informative(300, 4, x, y);
  ForestConfig cfg;
  cfg.n_trees = 50;
  const ForestModel f = rf_train(x, y, cfg);
  const auto imp = rf_feature_importance(f);
  EXPECT_GE(imp.importance(0), 0.9);
  EXPECT_NEAR(imp.importance.sum(), 1.0, 1e-12);
  for (const auto& tree : f.trees) {
    for (const auto& node : tree.nodes) EXPECT_GE(node.weighted_gini_decrease, 0.0);
  }
}

TEST(Forest, SingleStumpSeparatesOneDimensionalData) {
  Matrix x(100, 1);
  Vector y(100);
  for (Index i = 0; i < 100; ++i) {
    x(i, 0) = static_cast<double>(i);
    y(i) = i >= 50 ? 1.0 : 0.0;
  }
  ForestConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  const ForestModel f = rf_train(x, y, cfg);
  EXPECT_GE(1.0 - misclassification_rate(f.predict_proba(x), y), 0.9);
}

TEST(Forest, PureLabelsPredictOne) {
  Matrix x = Matrix::Random(10, 2);
  const ForestModel f = rf_train(x, Vector::Ones(10), ForestConfig{});
  EXPECT_EQ(f.predict_proba(x), Vector::Ones(10));
}

TEST(Forest, RejectsBadConfigAndShapes) {
  Matrix x = Matrix::Random(10, 2);
  Vector y = Vector::Zero(10);
  ForestConfig cfg;
  cfg.n_trees = 0;
  EXPECT_THROW(rf_train(x, y, cfg), Error);
  cfg = ForestConfig{};
  cfg.m_try = 3;
  EXPECT_THROW(rf_train(x, y, cfg), Error);
  const ForestModel f = rf_train(x, y, ForestConfig{});
  EXPECT_THROW(f.predict_proba(Matrix::Zero(2, 3)), Error);
}

TEST(Forest, DeterministicUnderSeed) {
  Matrix x;
  Vector y;
  one_informative(80, 1, x, y);
  ForestConfig cfg;
  cfg.n_trees = 20;
  std::stringstream a, b, c;
  rf_train(x, y, cfg).save(a);
  rf_train(x, y, cfg).save(b);
  cfg.seed = 99;
  rf_train(x, y, cfg).save(c);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

TEST(Forest, DiagnosticsAreConsistent) {
  Matrix x;
  Vector y;
  one_informative(120, 2, x, y);
  ForestConfig cfg;
  cfg.n_trees = 15;
  const ForestModel f = rf_train(x, y, cfg);
  const auto d = forest_diagnostics(f, x, y);
  EXPECT_GE(d.tree_correlation, -1.0);
  EXPECT_LE(d.tree_correlation, 1.0);
  EXPECT_GE(d.strength, -0.5);
  EXPECT_LE(d.strength, 0.5);
  EXPECT_DOUBLE_EQ(d.error_bound, rf_error_bound(std::clamp(d.tree_correlation, 0.0, 1.0), std::clamp(d.strength, 0.0, 1.0)));
  const Matrix per_tree = f.tree_predictions(x);
  EXPECT_EQ(per_tree.cols(), 15);
  EXPECT_LT((per_tree.rowwise().mean() - f.predict_proba(x)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forest, SaveLoadRoundTrip) {
  Matrix x;
  Vector y;
  one_informative(60, 3, x, y);
  ForestConfig cfg;
  cfg.n_trees = 5;
  const ForestModel f = rf_train(x, y, cfg);
  std::stringstream buffer;
  f.save(buffer);
  const ForestModel g = ForestModel::load(buffer);
  EXPECT_EQ(g.predict_proba(x), f.predict_proba(x));
  EXPECT_EQ(g.trees.size(), 5u);
}

}  // namespace
}  // namespace hybridml::learners
