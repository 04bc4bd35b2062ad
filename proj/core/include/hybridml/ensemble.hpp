#pragma once

#include "hybridml/common.hpp"
#include "hybridml/learners.hpp"

#include <string>
#include <vector>

namespace hybridml::ensemble {

/// Per-model validation error rates and pairwise residual correlations.
struct RiskMatrix {
  std::vector<std::string> names;
  Vector epsilon;
  /// Symmetric, unit diagonal, entries in [-1, 1].
  Matrix rho;
  /// Models whose residual vector had zero variance; their off-diagonal correlations are 0.
  std::vector<bool> zero_variance;

  Index size() const noexcept { return epsilon.size(); }

  /// A_ii = eps_i, A_ij = 2 rho_ij eps_i eps_j, so that E(w) = w'Aw.
  Matrix quadratic() const;

  /// Throws Error("ensemble", ...) if any invariant is broken.
  void validate() const;
};

struct EnsembleConfig {
  double alpha = 1.0;
  double beta = 0.0;
  /// true: w >= 0 and sum w = 1; false: only sum w = 1.
  bool simplex = true;

  void validate() const;
};

enum class SolverPath { closed_form, projected_gradient };

const char* solver_path_name(SolverPath path);

struct EnsembleWeights {
  Vector w;
  /// Multiplier of sum w = 1 in L = w'Aw - lambda (1'w - 1); equals 2 E at any KKT point.
  double lambda = 0.0;
  double objective = 0.0;
  SolverPath path = SolverPath::closed_form;
  /// Cholesky of 2A succeeded.
  bool hessian_positive_definite = false;
  /// Affine mode was requested but the objective is unbounded on the hyperplane, so the simplex
  /// solution was returned instead.
  bool affine_fallback = false;
};

/// Misclassification rate of each prediction vector against 0/1 labels.
Vector estimate_errors(const std::vector<Vector>& predictions, const Vector& y);

struct ResidualCorrelation {
  Matrix rho;
  std::vector<bool> zero_variance;
};

/// Pearson correlation of residuals p_i - y; needs at least 3 rows.
ResidualCorrelation residual_correlation(const std::vector<Vector>& predictions, const Vector& y);

RiskMatrix build_risk_matrix(std::vector<std::string> names, const std::vector<Vector>& predictions, const Vector& y);

/// Convenience: predict with each model on validation rows, then build the risk matrix.
RiskMatrix build_risk_matrix(const std::vector<learners::AnyModel>& models, const Matrix& x_val, const Vector& y_val);

/// w'Aw with the A of RiskMatrix::quadratic().
double ensemble_error(const Vector& w, const RiskMatrix& risk);

/// Euclidean projection onto {w >= 0, sum w = 1}.
Vector project_to_simplex(const Vector& v);

/// L * ||w - P(w - grad/L)|| for E(w) = w'Aw on the simplex, with L = 2 ||A||_2.
double gradient_mapping_norm(const Matrix& a, const Vector& w);

/// w = A^{-1} 1 / (1' A^{-1} 1) if A is positive definite; path closed_form. Empty w otherwise.
EnsembleWeights closed_form_weights(const Matrix& a);

/// Projected gradient on the simplex started from the uniform point and every vertex; the best
/// stationary point wins. Each run stops once the gradient-mapping norm is below 1e-10.
EnsembleWeights projected_gradient_weights(const Matrix& a);

EnsembleWeights optimize_weights(const RiskMatrix& risk, const EnsembleConfig& config);

/// 1 - mean of rho_ij over unordered pairs i < j.
double diversity_score(const Matrix& rho);

/// alpha * sum w_i eps_i - beta * D(rho).
double combined_loss(const Vector& w, const RiskMatrix& risk, const EnsembleConfig& config);

struct TradeoffPoint {
  double alpha = 0.0;
  double beta = 0.0;
  double weighted_error = 0.0;
  double diversity = 0.0;
  double loss = 0.0;
};

/// combined_loss over the cartesian grid alphas x betas at fixed weights.
std::vector<TradeoffPoint> tradeoff_sweep(const Vector& w, const RiskMatrix& risk, const std::vector<double>& alphas,
                                          const std::vector<double>& betas);

/// Weighted sum of per-model probability vectors, clipped to [0,1].
Vector ensemble_predict(const std::vector<Vector>& predictions, const Vector& w);
Vector ensemble_predict(const std::vector<learners::AnyModel>& models, const Vector& w, const Matrix& rows);

}  // namespace hybridml::ensemble
