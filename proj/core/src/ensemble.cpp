#include "hybridml/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>

namespace hybridml::ensemble {

namespace {

constexpr const char* kModule = "ensemble";
constexpr double kStationary = 1e-10;
constexpr int kMaxProjectedSteps = 1'000'000;

void require_weights(const Vector& w, Index n) {
  if (w.size() != n) {
    throw Error(kModule, "weight vector has " + std::to_string(w.size()) + " entries for " + std::to_string(n) +
                             " models");
  }
}

double lipschitz(const Matrix& a) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return 2.0 * eig.eigenvalues().cwiseAbs().maxCoeff();
}

// Minimizer of w'A_SS w on {sum w = 1} restricted to the support S, if the face problem is
// strictly convex there; nullopt otherwise.
std::optional<Vector> face_solve(const Matrix& a, const std::vector<Index>& support) {
  const auto k = static_cast<Index>(support.size());
  Matrix kkt = Matrix::Zero(k + 1, k + 1);
  for (Index r = 0; r < k; ++r) {
    for (Index c = 0; c < k; ++c) kkt(r, c) = 2.0 * a(support[r], support[c]);
    kkt(r, k) = 1.0;
    kkt(k, r) = 1.0;
  }
  Vector rhs = Vector::Zero(k + 1);
  rhs(k) = 1.0;
  const Eigen::FullPivLU<Matrix> lu(kkt);
  if (!lu.isInvertible()) return std::nullopt;
  const Vector sol = lu.solve(rhs);
  Vector w = Vector::Zero(a.rows());
  for (Index r = 0; r < k; ++r) w(support[r]) = sol(r);
  return w;
}

bool reduced_hessian_positive_definite(const Matrix& a) {
  const Index n = a.rows();
  if (n == 1) return true;
  // Columns e_i - e_n span {1'v = 0}.
  Matrix z = Matrix::Zero(n, n - 1);
  for (Index i = 0; i < n - 1; ++i) {
    z(i, i) = 1.0;
    z(n - 1, i) = -1.0;
  }
  const Matrix reduced = z.transpose() * a * z;
  return Eigen::LLT<Matrix>(reduced).info() == Eigen::Success;
}

EnsembleWeights finish(const Matrix& a, Vector w, SolverPath path) {
  w /= w.sum();
  EnsembleWeights out;
  out.w = std::move(w);
  out.objective = out.w.dot(a * out.w);
  out.lambda = 2.0 * out.objective;
  out.path = path;
  out.hessian_positive_definite = Eigen::LLT<Matrix>(2.0 * a).info() == Eigen::Success;
  return out;
}

}  // namespace

const char* solver_path_name(SolverPath path) {
  return path == SolverPath::closed_form ? "closed-form" : "projected-gradient";
}

Matrix RiskMatrix::quadratic() const {
  const Index n = size();
  Matrix a(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      a(i, j) = i == j ? epsilon(i) : 2.0 * rho(i, j) * epsilon(i) * epsilon(j);
    }
  }
  return a;
}

void RiskMatrix::validate() const {
  const Index n = size();
  if (n < 1) throw Error(kModule, "risk matrix needs at least one model");
  if (rho.rows() != n || rho.cols() != n) throw Error(kModule, "correlation matrix shape does not match errors");
  if (!names.empty() && static_cast<Index>(names.size()) != n) throw Error(kModule, "model name count mismatch");
  for (Index i = 0; i < n; ++i) {
    if (!(epsilon(i) >= 0.0 && epsilon(i) <= 1.0)) {
      throw Error(kModule, "error rate " + std::to_string(i) + " outside [0,1]");
    }
    if (rho(i, i) != 1.0) throw Error(kModule, "correlation diagonal must be 1");
    for (Index j = 0; j < n; ++j) {
      if (!(std::abs(rho(i, j)) <= 1.0)) throw Error(kModule, "correlation outside [-1,1]");
      if (std::abs(rho(i, j) - rho(j, i)) > 1e-12) throw Error(kModule, "correlation matrix not symmetric");
    }
  }
}

void EnsembleConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) throw Error(kModule, "alpha and beta must be nonnegative");
}

Vector estimate_errors(const std::vector<Vector>& predictions, const Vector& y) {
  if (y.size() == 0) throw Error(kModule, "validation split is empty");
  Vector eps(static_cast<Index>(predictions.size()));
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    eps(static_cast<Index>(m)) = misclassification_rate(predictions[m], y);
  }
  return eps;
}

ResidualCorrelation residual_correlation(const std::vector<Vector>& predictions, const Vector& y) {
  if (y.size() < 3) throw Error(kModule, "residual correlation needs at least 3 validation rows");
  const auto n = static_cast<Index>(predictions.size());
  std::vector<Vector> residual;
  ResidualCorrelation out{Matrix::Identity(n, n), std::vector<bool>(predictions.size(), false)};
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    if (predictions[m].size() != y.size()) throw Error(kModule, "prediction length does not match labels");
    residual.push_back(predictions[m] - y);
    const Vector centered = residual.back().array() - residual.back().mean();
    out.zero_variance[m] = centered.squaredNorm() == 0.0;
  }
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const auto iu = static_cast<std::size_t>(i);
      const auto ju = static_cast<std::size_t>(j);
      const double r = out.zero_variance[iu] || out.zero_variance[ju] ? 0.0 : pearson(residual[iu], residual[ju]);
      out.rho(i, j) = r;
      out.rho(j, i) = r;
    }
  }
  return out;
}

RiskMatrix build_risk_matrix(std::vector<std::string> names, const std::vector<Vector>& predictions, const Vector& y) {
  RiskMatrix risk;
  risk.names = std::move(names);
  risk.epsilon = estimate_errors(predictions, y);
  auto corr = residual_correlation(predictions, y);
  risk.rho = std::move(corr.rho);
  risk.zero_variance = std::move(corr.zero_variance);
  risk.validate();
  return risk;
}

RiskMatrix build_risk_matrix(const std::vector<learners::AnyModel>& models, const Matrix& x_val, const Vector& y_val) {
  std::vector<std::string> names;
  std::vector<Vector> preds;
  for (const auto& m : models) {
    names.emplace_back(learners::learner_name(learners::kind_of(m)));
    preds.push_back(learners::predict(m, x_val));
  }
  return build_risk_matrix(std::move(names), preds, y_val);
}

double ensemble_error(const Vector& w, const RiskMatrix& risk) {
  require_weights(w, risk.size());
  return w.dot(risk.quadratic() * w);
}

Vector project_to_simplex(const Vector& v) {
  if (v.size() == 0) throw Error(kModule, "cannot project an empty vector");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  Vector w = (v.array() - theta).max(0.0);
  return w / w.sum();
}

double gradient_mapping_norm(const Matrix& a, const Vector& w) {
  const double l = lipschitz(a);
  if (l == 0.0) return 0.0;
  const Vector step = project_to_simplex(w - (2.0 * a * w) / l);
  return l * (w - step).norm();
}

EnsembleWeights closed_form_weights(const Matrix& a) {
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) return {};
  const Vector ainv_one = llt.solve(Vector::Ones(a.rows()));
  const double denom = ainv_one.sum();
  if (!(denom > 0.0) || !ainv_one.allFinite()) return {};
  return finish(a, ainv_one / denom, SolverPath::closed_form);
}

EnsembleWeights projected_gradient_weights(const Matrix& a) {
  const Index n = a.rows();
  const double l = lipschitz(a);
  std::vector<Vector> starts{Vector::Constant(n, 1.0 / static_cast<double>(n))};
  for (Index i = 0; i < n; ++i) starts.push_back(Vector::Unit(n, i));

  Vector best;
  double best_value = std::numeric_limits<double>::infinity();
  for (Vector w : starts) {
    if (l > 0.0) {
      for (int it = 0; it < kMaxProjectedSteps; ++it) {
        const Vector next = project_to_simplex(w - (2.0 * a * w) / l);
        const double gm = l * (w - next).norm();
        w = next;
        if (gm < kStationary) break;
      }
      // Linear convergence can stall at tiny gaps; solve the identified face exactly.
      std::vector<Index> support;
      for (Index i = 0; i < n; ++i) {
        if (w(i) > 1e-12) support.push_back(i);
      }
      if (auto polished = face_solve(a, support); polished && polished->minCoeff() >= 0.0) {
        const Vector p = *polished / polished->sum();
        if (p.dot(a * p) <= w.dot(a * w) && gradient_mapping_norm(a, p) <= gradient_mapping_norm(a, w)) w = p;
      }
    }
    const double value = w.dot(a * w);
    if (value < best_value) {
      best_value = value;
      best = w;
    }
  }
  return finish(a, best, SolverPath::projected_gradient);
}

EnsembleWeights optimize_weights(const RiskMatrix& risk, const EnsembleConfig& config) {
  risk.validate();
  config.validate();
  const Matrix a = risk.quadratic();
  const EnsembleWeights closed = closed_form_weights(a);
  const bool pd = closed.w.size() > 0;

  if (config.simplex) {
    if (pd && closed.w.minCoeff() >= 0.0) return closed;
    return projected_gradient_weights(a);
  }
  if (pd) return closed;
  if (reduced_hessian_positive_definite(a)) {
    std::vector<Index> all(static_cast<std::size_t>(a.rows()));
    for (Index i = 0; i < a.rows(); ++i) all[static_cast<std::size_t>(i)] = i;
    if (auto w = face_solve(a, all)) return finish(a, *w, SolverPath::closed_form);
  }
  EnsembleWeights fallback = projected_gradient_weights(a);
  fallback.affine_fallback = true;
  return fallback;
}

double diversity_score(const Matrix& rho) {
  const Index n = rho.rows();
  if (n < 2 || rho.cols() != n) throw Error(kModule, "diversity needs a square correlation matrix with n >= 2");
  double sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) sum += rho(i, j);
  }
  return 1.0 - sum / (static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

double combined_loss(const Vector& w, const RiskMatrix& risk, const EnsembleConfig& config) {
  require_weights(w, risk.size());
  config.validate();
  return config.alpha * w.dot(risk.epsilon) - config.beta * diversity_score(risk.rho);
}

std::vector<TradeoffPoint> tradeoff_sweep(const Vector& w, const RiskMatrix& risk, const std::vector<double>& alphas,
                                          const std::vector<double>& betas) {
  require_weights(w, risk.size());
  const double weighted = w.dot(risk.epsilon);
  const double d = diversity_score(risk.rho);
  std::vector<TradeoffPoint> out;
  for (double a : alphas) {
    for (double b : betas) {
      const EnsembleConfig cfg{a, b, true};
      out.push_back({a, b, weighted, d, combined_loss(w, risk, cfg)});
    }
  }
  return out;
}

Vector ensemble_predict(const std::vector<Vector>& predictions, const Vector& w) {
  require_weights(w, static_cast<Index>(predictions.size()));
  if (predictions.empty()) throw Error(kModule, "ensemble needs at least one model");
  Vector out = Vector::Zero(predictions.front().size());
  for (std::size_t m = 0; m < predictions.size(); ++m) {
    if (predictions[m].size() != out.size()) throw Error(kModule, "prediction lengths differ across models");
    out += w(static_cast<Index>(m)) * predictions[m];
  }
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

Vector ensemble_predict(const std::vector<learners::AnyModel>& models, const Vector& w, const Matrix& rows) {
  std::vector<Vector> preds;
  for (const auto& m : models) preds.push_back(learners::predict(m, rows));
  return ensemble_predict(preds, w);
}

}  // namespace hybridml::ensemble
