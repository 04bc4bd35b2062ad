#pragma once

#include "hybridml/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace hybridml::learners {

struct ForestConfig {
  int n_trees = 200;
  int max_depth = 8;
  /// Features tried per node; 0 selects floor(sqrt(n_features)).
  int m_try = 0;
  int min_leaf = 1;
  std::uint64_t seed = 1;
};

/// Binary classification tree node. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Class-1 fraction of the node's training samples; class 0 gets 1 - prob1.
  double prob1 = 0.0;
  Index n_samples = 0;
  /// Gini decrease of this split weighted by n_samples / root samples (0 at leaves).
  double weighted_gini_decrease = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
};

struct ForestModel {
  Index n_features = 0;
  ForestConfig config;
  std::vector<DecisionTree> trees;

  /// Mean leaf class-1 probability across trees.
  Vector predict_proba(const Matrix& rows) const;
  /// Per-tree class-1 probabilities, one column per tree.
  Matrix tree_predictions(const Matrix& rows) const;

  void save(std::ostream& out) const;
  static ForestModel load(std::istream& in);
};

/// 1 - sum_j p_j^2 over class counts. Throws if all counts are zero or any is negative.
double gini_impurity(std::span<const double> class_counts);

/// Bootstrap forest of Gini-split trees with m_try random features per node.
ForestModel rf_train(const Matrix& x, const Vector& y, const ForestConfig& config);

struct FeatureImportance {
  Vector importance;
  /// Mean Gini decrease per feature before normalization.
  Vector mean_decrease;
  /// The forest made no splits; importance is uniform.
  bool uniform_fallback = false;
};

/// Normalizes mean decreases to sum to one (uniform with the fallback flag if all are zero).
FeatureImportance normalize_importance(const Vector& mean_decrease);

FeatureImportance rf_feature_importance(const ForestModel& forest);

/// Upper bound rho (1 - s) + (1 - rho) s on forest error from tree correlation and strength.
double rf_error_bound(double rho, double s);

struct ForestDiagnostics {
  /// Mean pairwise Pearson correlation of tree outputs.
  double tree_correlation = 0.0;
  /// Mean single-tree accuracy minus 0.5.
  double strength = 0.0;
  double error_bound = 0.0;
  double forest_error = 0.0;
};

ForestDiagnostics forest_diagnostics(const ForestModel& forest, const Matrix& x, const Vector& y);

}  // namespace hybridml::learners
