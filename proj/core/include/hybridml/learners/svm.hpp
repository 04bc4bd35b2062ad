#pragma once

#include "hybridml/common.hpp"

#include <iosfwd>

namespace hybridml::learners {

struct SvmConfig {
  double c = 1.0;
  /// Stopping gap on the maximal violating pair.
  double tolerance = 1e-8;
  /// Iteration cap is max_passes * n_rows.
  int max_passes = 1000;
  /// Coefficient of the quadratic term in the dual, max sum(a) - k * sum a_i a_j y_i y_j <x_i, x_j>.
  /// 0.5 is the textbook form; any k > 0 gives the same hyperplane, with a = a_half / (2k) and box C / (2k).
  double dual_coefficient = 0.5;
};

/// Linear soft-margin SVM. Decision value is w.x + b; labels are handled internally as -1/+1.
struct SvmModel {
  Vector w;
  double b = 0.0;
  double c = 1.0;
  double dual_coefficient = 0.5;
  /// Dual variables in the scale of dual_coefficient; each lies in [0, box()].
  Vector alpha;
  IndexList support;
  bool converged = false;
  long long iterations = 0;

  double box() const noexcept { return c / (2.0 * dual_coefficient); }

  Vector decision(const Matrix& rows) const;
  /// sigmoid(decision value).
  Vector predict_proba(const Matrix& rows) const;

  void save(std::ostream& out) const;
  static SvmModel load(std::istream& in);
};

/// Labels may be 0/1 or -1/+1; both classes must be present.
SvmModel svm_train(const Matrix& x, const Vector& y, const SvmConfig& config);

/// 2 / ||w||.
double svm_margin(const SvmModel& model);

/// Largest violation of the box-constrained KKT conditions on the training data, with
/// g_i = y_i (w.x_i + b) - 1: -g_i for a_i = 0, g_i for a_i at the box, |g_i| for free a_i.
double svm_kkt_residual(const SvmModel& model, const Matrix& x, const Vector& y);

/// sum_i a_i y_i.
double svm_dual_equality(const SvmModel& model, const Vector& y);

}  // namespace hybridml::learners
