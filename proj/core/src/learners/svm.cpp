#include "hybridml/learners/svm.hpp"

#include "../model_io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hybridml::learners {

namespace {

constexpr const char* kModule = "learners";
constexpr double kTau = 1e-12;

Vector signed_labels(const Vector& y) {
  Vector s(y.size());
  bool has_zero = false;
  bool has_minus = false;
  for (Index i = 0; i < y.size(); ++i) {
    const double v = y(i);
    if (v == 1.0) {
      s(i) = 1.0;
    } else if (v == 0.0 || v == -1.0) {
      s(i) = -1.0;
      (v == 0.0 ? has_zero : has_minus) = true;
    } else {
      throw Error(kModule, "SVM labels must be binary (0/1 or -1/+1), got " + format_double(v) + " at row " +
                               std::to_string(i));
    }
  }
  if (has_zero && has_minus) throw Error(kModule, "SVM labels mix 0 and -1");
  if (s.minCoeff() == s.maxCoeff()) throw Error(kModule, "SVM training needs both classes");
  return s;
}

}  // namespace

Vector SvmModel::decision(const Matrix& rows) const {
  if (rows.cols() != w.size()) {
    throw Error(kModule, "SVM expects " + std::to_string(w.size()) + " features, got " + std::to_string(rows.cols()));
  }
  return (rows * w).array() + b;
}

Vector SvmModel::predict_proba(const Matrix& rows) const {
  return decision(rows).unaryExpr([](double z) { return sigmoid(z); });
}

void SvmModel::save(std::ostream& out) const {
  std::vector<double> sv(support.begin(), support.end());
  model_io::Writer(out)
      .field("w", w)
      .field("b", b)
      .field("c", c)
      .field("dual_coefficient", dual_coefficient)
      .field("alpha", alpha)
      .field("support", sv)
      .field("converged", static_cast<long long>(converged))
      .field("iterations", iterations);
}

SvmModel SvmModel::load(std::istream& in) {
  model_io::Reader r(in);
  SvmModel m;
  m.w = r.vector("w");
  m.b = r.real("b");
  m.c = r.real("c");
  m.dual_coefficient = r.real("dual_coefficient");
  m.alpha = r.vector("alpha");
  for (double v : r.list("support")) m.support.push_back(static_cast<Index>(v));
  m.converged = r.integer("converged") != 0;
  m.iterations = r.integer("iterations");
  return m;
}

// SMO with second-order working-set selection on
//   min 1/2 a'Qa - 1'a,  Q_ij = 2k y_i y_j <x_i, x_j>,  0 <= a_i <= C/(2k),  y'a = 0.
SvmModel svm_train(const Matrix& x, const Vector& y, const SvmConfig& config) {
  if (x.rows() != y.size() || x.rows() < 2) throw Error(kModule, "SVM training data shape mismatch");
  if (!(config.c > 0.0)) throw Error(kModule, "SVM box constant C must be positive");
  if (!(config.dual_coefficient > 0.0)) throw Error(kModule, "SVM dual coefficient must be positive");
  if (!(config.tolerance > 0.0) || config.max_passes < 1) throw Error(kModule, "invalid SVM stopping settings");

  const Vector s = signed_labels(y);
  const Index n = x.rows();
  const double scale = 2.0 * config.dual_coefficient;
  const Matrix kernel = scale * (x * x.transpose());
  const double box = config.c / scale;

  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);
  auto at_upper = [&](Index t) { return alpha(t) >= box; };
  auto at_lower = [&](Index t) { return alpha(t) <= 0.0; };

  SvmModel m;
  m.c = config.c;
  m.dual_coefficient = config.dual_coefficient;
  const long long max_iter = static_cast<long long>(config.max_passes) * n;

  for (; m.iterations < max_iter; ++m.iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    Index i = -1;
    for (Index t = 0; t < n; ++t) {
      if (s(t) > 0 ? !at_upper(t) : !at_lower(t)) {
        const double v = -s(t) * grad(t);
        if (v >= gmax) {
          gmax = v;
          i = t;
        }
      }
    }
    double gmax2 = -std::numeric_limits<double>::infinity();
    Index j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < n && i >= 0; ++t) {
      if (s(t) > 0 ? !at_lower(t) : !at_upper(t)) {
        const double v = s(t) * grad(t);
        gmax2 = std::max(gmax2, v);
        const double diff = gmax + v;
        if (diff > 0) {
          double quad = kernel(i, i) + kernel(t, t) - 2.0 * kernel(i, t);
          if (quad <= 0) quad = kTau;
          const double obj = -diff * diff / quad;
          if (obj <= best) {
            best = obj;
            j = t;
          }
        }
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < config.tolerance) {
      m.converged = true;
      break;
    }

    const double old_i = alpha(i);
    const double old_j = alpha(j);
    const double qij = s(i) * s(j) * kernel(i, j);
    if (s(i) != s(j)) {
      double quad = kernel(i, i) + kernel(j, j) + 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (-grad(i) - grad(j)) / quad;
      const double diff = alpha(i) - alpha(j);
      alpha(i) += delta;
      alpha(j) += delta;
      if (diff > 0) {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = diff;
        }
      } else if (alpha(i) < 0) {
        alpha(i) = 0;
        alpha(j) = -diff;
      }
      if (diff > 0) {
        if (alpha(i) > box) {
          alpha(i) = box;
          alpha(j) = box - diff;
        }
      } else if (alpha(j) > box) {
        alpha(j) = box;
        alpha(i) = box + diff;
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * qij;
      if (quad <= 0) quad = kTau;
      const double delta = (grad(i) - grad(j)) / quad;
      const double sum = alpha(i) + alpha(j);
      alpha(i) -= delta;
      alpha(j) += delta;
      if (sum > box) {
        if (alpha(i) > box) {
          alpha(i) = box;
          alpha(j) = sum - box;
        }
        if (alpha(j) > box) {
          alpha(j) = box;
          alpha(i) = sum - box;
        }
      } else {
        if (alpha(j) < 0) {
          alpha(j) = 0;
          alpha(i) = sum;
        }
        if (alpha(i) < 0) {
          alpha(i) = 0;
          alpha(j) = sum;
        }
      }
    }
    const double di = alpha(i) - old_i;
    const double dj = alpha(j) - old_j;
    for (Index t = 0; t < n; ++t) {
      grad(t) += s(t) * (s(i) * kernel(i, t) * di + s(j) * kernel(j, t) * dj);
    }
  }

  // Bias from free variables (y_i G_i is constant across them at optimality).
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Index t = 0; t < n; ++t) {
    const double yg = s(t) * grad(t);
    if (at_upper(t)) {
      if (s(t) < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (at_lower(t)) {
      if (s(t) > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : (upper + lower) / 2.0;
  m.b = -rho;
  m.alpha = alpha;
  m.w = scale * (x.transpose() * alpha.cwiseProduct(s));
  for (Index t = 0; t < n; ++t) {
    if (alpha(t) > 0.0) m.support.push_back(t);
  }
  return m;
}

double svm_margin(const SvmModel& model) {
  const double norm = model.w.norm();
  if (!(norm > 0.0)) throw Error(kModule, "margin undefined for a zero weight vector");
  return 2.0 / norm;
}

double svm_kkt_residual(const SvmModel& model, const Matrix& x, const Vector& y) {
  const Vector s = signed_labels(y);
  if (model.alpha.size() != s.size()) throw Error(kModule, "KKT check needs the training rows");
  const Vector f = model.decision(x);
  const double box = model.box();
  double worst = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    const double g = s(i) * f(i) - 1.0;
    double v;
    if (model.alpha(i) <= 0.0) {
      v = -g;
    } else if (model.alpha(i) >= box) {
      v = g;
    } else {
      v = std::abs(g);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

double svm_dual_equality(const SvmModel& model, const Vector& y) {
  const Vector s = signed_labels(y);
  if (model.alpha.size() != s.size()) throw Error(kModule, "dual check needs the training labels");
  return model.alpha.dot(s);
}

}  // namespace hybridml::learners
