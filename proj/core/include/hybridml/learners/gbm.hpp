#pragma once

#include "hybridml/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hybridml::learners {

struct GbmConfig {
  int iterations = 100;
  int max_depth = 2;
  double shrinkage = 0.1;
  int min_leaf = 5;
  /// Row fraction drawn (without replacement) per stage; 1 uses every row and ignores the seed.
  double subsample = 1.0;
  double armijo_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_backtracks = 50;
  std::uint64_t seed = 1;
};

struct RegressionNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const noexcept { return feature < 0; }
};

/// Least-squares regression tree.
struct RegressionTree {
  std::vector<RegressionNode> nodes;

  double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  Vector predict(const Matrix& rows) const;
};

/// Depth-limited least-squares fit of `target` on the rows listed in `rows`.
RegressionTree fit_regression_tree(const Matrix& x, const Vector& target, const IndexList& rows, int max_depth,
                                   int min_leaf);

struct GbmStage {
  RegressionTree tree;
  /// Line-search step (before shrinkage); always satisfies the Armijo inequality.
  double step = 0.0;
  bool wolfe_curvature = false;
};

/// Logistic-loss boosting model: F(x) = F0 + shrinkage * sum_m step_m * h_m(x).
struct GbmModel {
  Index n_features = 0;
  double initial_score = 0.0;
  double shrinkage = 0.1;
  std::vector<GbmStage> stages;
  /// Training loss (mean logistic loss) at F0 and after every accepted stage.
  std::vector<double> loss_trace;
  /// Stages dropped because the line search found no Armijo step or no descent direction existed.
  int skipped_stages = 0;

  Vector decision(const Matrix& rows) const;
  Vector predict_proba(const Matrix& rows) const;

  void save(std::ostream& out) const;
  static GbmModel load(std::istream& in);
};

/// Mean logistic loss of scores F against 0/1 labels.
double logistic_loss(const Vector& scores, const Vector& y);

struct LineSearchResult {
  double step = 0.0;
  bool armijo = false;
  bool wolfe_curvature = false;
  int backtracks = 0;
};

/// Backtracking search along direction h from scores F for the summed logistic loss, starting at
/// the Newton step; satisfies Armijo sufficient decrease and then checks strong Wolfe curvature
/// (extending the step while Armijo still holds if the curvature test fails on the short side).
LineSearchResult armijo_wolfe_search(const Vector& scores, const Vector& direction, const Vector& y, double c1,
                                     double c2, int max_backtracks);

GbmModel gb_train(const Matrix& x, const Vector& y, const GbmConfig& config);

}  // namespace hybridml::learners
