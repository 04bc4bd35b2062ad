#pragma once

#include "hybridml/adam.hpp"
#include "hybridml/common.hpp"
#include "hybridml/learners.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hybridml::stacking {

/// Out-of-fold base predictions. Column m of `values` holds learner `kinds[m]`.
struct MetaFeatures {
  Matrix values;
  std::vector<learners::LearnerKind> kinds;
  /// fold[i] is the fold that held out row i.
  std::vector<int> fold;
  int k = 0;
  /// Rows each fold's base models were trained on (everything outside that fold).
  std::vector<IndexList> fold_training_rows;
  /// (fold, learner column) pairs filled with the training base rate because the learner could
  /// not be fit on a single-class fold.
  std::vector<std::pair<int, int>> base_rate_fills;
};

/// Fold ids: position in a seeded shuffle, modulo k. Sizes differ by at most 1.
std::vector<int> assign_folds(Index n_rows, int k, std::uint64_t seed);

/// k-fold out-of-fold predictions; requires k >= 2 and at least k rows.
MetaFeatures oof_predictions(const Matrix& x, const Vector& y, const std::vector<learners::LearnerKind>& kinds,
                             const learners::LearnerConfigs& configs, int k, std::uint64_t seed);

struct MetaConfig {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int epochs = 5000;
  /// eta_t = eta_0 / (1 + t / half_life); a value <= 0 keeps eta constant.
  double half_life = 1000.0;
  int window = 10;
  double relative_tolerance = 1e-8;
  /// Stop at the epoch where the convergence criterion first fires.
  bool stop_when_converged = true;
};

/// Linear meta-model: prediction = features . coefficients + intercept.
struct MetaModel {
  Vector coefficients;
  double intercept = 0.0;
  AdamState adam;
  double base_learning_rate = 0.0;
  double half_life = 0.0;

  /// Flat parameter vector [coefficients | intercept].
  Vector parameters() const;
  void set_parameters(const Vector& p);

  Vector raw_predict(const Matrix& features) const;
};

/// Average of the base models: coefficients 1/n, intercept 0.
MetaModel uniform_meta_model(Index n_models);

struct MetaLoss {
  double sum = 0.0;
  double mean = 0.0;
};

/// Unaveraged squared loss sum_i (y_i - M(features_i))^2, plus its per-row mean.
MetaLoss meta_loss(const MetaModel& meta, const Matrix& features, const Vector& y);

/// Gradient of meta_loss().sum with respect to parameters().
Vector meta_loss_gradient(const MetaModel& meta, const Matrix& features, const Vector& y);

struct ConvergenceTrace {
  std::vector<double> loss;
  bool converged = false;
  /// Epoch (0-based) at which the criterion fired; -1 if it never did.
  int converged_epoch = -1;
};

/// Trailing-window means of a loss sequence, one per complete window: entry k averages loss[k .. k+window-1].
std::vector<double> windowed_means(const std::vector<double>& loss, int window);

struct MetaFit {
  MetaModel model;
  ConvergenceTrace trace;
};

/// Full-batch Adam on the summed loss starting from the uniform average. Converged when the mean of
/// the latest `window` losses is less than relative_tolerance (relative) below the mean of the
/// preceding disjoint window.
MetaFit meta_train(const Matrix& features, const Vector& y, const MetaConfig& config);

/// Meta linear map applied to base predictions, clipped to [0,1].
Vector stack_predict(const MetaModel& meta, const std::vector<Vector>& base_predictions);
Vector stack_predict(const MetaModel& meta, const std::vector<learners::AnyModel>& models, const Matrix& rows);

}  // namespace hybridml::stacking
