#include "hybridml/hyperopt/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace hybridml::hyperopt {

namespace {

constexpr const char* kModule = "hyperopt";

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

std::optional<GpSurrogate> factorize(const Matrix& x, const Vector& f, double length_scale, double signal_variance,
                                     const GpConfig& config) {
  GpSurrogate gp;
  gp.x = x;
  gp.f = f;
  gp.prior_mean = f.mean();
  gp.length_scale = length_scale;
  gp.signal_variance = signal_variance;
  gp.noise_variance = config.noise_variance;
  const Index n = x.rows();
  Matrix k(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = gp.kernel(x.row(i).transpose(), x.row(j).transpose());
    }
  }
  for (double jitter = 0.0;;) {
    Matrix a = k;
    a.diagonal().array() += config.noise_variance + jitter;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() == Eigen::Success) {
      gp.jitter = jitter;
      gp.chol = llt.matrixL();
      const Vector centered = f.array() - gp.prior_mean;
      gp.weights = llt.solve(centered);
      gp.log_marginal_likelihood = -0.5 * centered.dot(gp.weights) - gp.chol.diagonal().array().log().sum() -
                                   0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
      return gp;
    }
    if (jitter >= config.max_jitter) return std::nullopt;
    jitter = jitter == 0.0 ? config.initial_jitter : std::min(jitter * 10.0, config.max_jitter);
  }
}

void require_observations(const Matrix& x, const Vector& f) {
  if (x.rows() != f.size()) throw Error(kModule, "GP inputs and values differ in count");
  if (x.rows() < 2) throw Error(kModule, "GP fit needs at least 2 observations");
  if (!f.allFinite()) throw Error(kModule, "GP observations must be finite");
}

}  // namespace

void SearchSpace::validate() const {
  if (dims.empty()) throw Error(kModule, "search space has no dimensions");
  for (const auto& d : dims) {
    if (!(d.lower < d.upper)) throw Error(kModule, "dimension '" + d.name + "' needs lower < upper");
    if (d.log_scale && !(d.lower > 0.0)) throw Error(kModule, "log-scaled dimension '" + d.name + "' needs lower > 0");
  }
}

Vector SearchSpace::to_unit(const Vector& x) const {
  if (x.size() != size()) throw Error(kModule, "point dimension does not match search space");
  Vector u(size());
  for (Index i = 0; i < size(); ++i) {
    const auto& d = dims[static_cast<std::size_t>(i)];
    u(i) = d.log_scale ? (std::log(x(i)) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower))
                       : (x(i) - d.lower) / (d.upper - d.lower);
  }
  return u;
}

Vector SearchSpace::from_unit(const Vector& u) const {
  if (u.size() != size()) throw Error(kModule, "point dimension does not match search space");
  Vector x(size());
  for (Index i = 0; i < size(); ++i) {
    const auto& d = dims[static_cast<std::size_t>(i)];
    const double t = std::clamp(u(i), 0.0, 1.0);
    double v = d.log_scale ? std::exp(std::log(d.lower) + t * (std::log(d.upper) - std::log(d.lower)))
                           : d.lower + t * (d.upper - d.lower);
    if (d.integer) v = std::clamp(std::round(v), std::ceil(d.lower), std::floor(d.upper));
    x(i) = std::clamp(v, d.lower, d.upper);
  }
  return x;
}

Vector SearchSpace::snap(const Vector& u) const {
  bool any_integer = false;
  for (const auto& d : dims) any_integer = any_integer || d.integer;
  if (!any_integer) return u.cwiseMax(0.0).cwiseMin(1.0);
  return to_unit(from_unit(u));
}

double GpSurrogate::kernel(const Vector& a, const Vector& b) const {
  return signal_variance * std::exp(-0.5 * (a - b).squaredNorm() / (length_scale * length_scale));
}

GpPosterior GpSurrogate::posterior(const Vector& point) const {
  if (point.size() != x.cols()) throw Error(kModule, "query point dimension does not match the GP");
  Vector k(size());
  for (Index i = 0; i < size(); ++i) k(i) = kernel(x.row(i).transpose(), point);
  GpPosterior p;
  p.mean = prior_mean + k.dot(weights);
  const Vector v = chol.triangularView<Eigen::Lower>().solve(k);
  p.raw_variance = signal_variance - v.squaredNorm();
  p.std = std::sqrt(std::max(p.raw_variance, 0.0));
  return p;
}

GpSurrogate gp_fit_fixed(const Matrix& x, const Vector& f, double length_scale, double signal_variance,
                         const GpConfig& config) {
  require_observations(x, f);
  if (!(length_scale > 0.0) || !(signal_variance > 0.0)) throw Error(kModule, "GP hyperparameters must be positive");
  auto gp = factorize(x, f, length_scale, signal_variance, config);
  if (!gp) throw Error(kModule, "kernel matrix not positive definite even with jitter " + format_double(config.max_jitter));
  return *gp;
}

GpSurrogate gp_fit(const Matrix& x, const Vector& f, const GpConfig& config) {
  require_observations(x, f);
  if (config.length_scales.empty() || config.signal_scales.empty()) throw Error(kModule, "empty GP hyperparameter grid");
  const double spread = std::sqrt((f.array() - f.mean()).square().mean());
  const double unit = config.signal_reference > 0.0 ? config.signal_reference : (spread > 0.0 ? spread : 1.0);
  std::optional<GpSurrogate> best;
  for (double ell : config.length_scales) {
    for (double s : config.signal_scales) {
      auto gp = factorize(x, f, ell, (s * unit) * (s * unit), config);
      if (gp && (!best || gp->log_marginal_likelihood > best->log_marginal_likelihood)) best = std::move(gp);
    }
  }
  if (!best) throw Error(kModule, "no GP hyperparameter candidate factorized even with jitter");
  return *best;
}

bool gp_extend(GpSurrogate& gp, const Vector& point, double value) {
  if (point.size() != gp.x.cols()) throw Error(kModule, "query point dimension does not match the GP");
  if (!std::isfinite(value)) throw Error(kModule, "GP observations must be finite");
  const Index n = gp.size();
  Vector k(n);
  for (Index i = 0; i < n; ++i) k(i) = gp.kernel(gp.x.row(i).transpose(), point);
  const Vector l = gp.chol.triangularView<Eigen::Lower>().solve(k);
  const double pivot = gp.signal_variance + gp.noise_variance + gp.jitter - l.squaredNorm();
  if (!(pivot > 0.0)) return false;

  Matrix chol = Matrix::Zero(n + 1, n + 1);
  chol.topLeftCorner(n, n) = gp.chol;
  chol.block(n, 0, 1, n) = l.transpose();
  chol(n, n) = std::sqrt(pivot);
  gp.chol = std::move(chol);
  gp.x.conservativeResize(n + 1, Eigen::NoChange);
  gp.x.row(n) = point.transpose();
  gp.f.conservativeResize(n + 1);
  gp.f(n) = value;
  gp.prior_mean = gp.f.mean();

  const Vector centered = gp.f.array() - gp.prior_mean;
  const Vector half = gp.chol.triangularView<Eigen::Lower>().solve(centered);
  gp.weights = gp.chol.transpose().triangularView<Eigen::Upper>().solve(half);
  gp.log_marginal_likelihood = -0.5 * centered.dot(gp.weights) - gp.chol.diagonal().array().log().sum() -
                               0.5 * static_cast<double>(n + 1) * std::log(2.0 * std::numbers::pi);
  return true;
}

double expected_improvement(double mean, double std, double f_star) {
  const double gain = f_star - mean;
  if (!(std > 0.0)) return std::max(gain, 0.0);
  const double z = gain / std;
  return std::max(gain * normal_cdf(z) + std * normal_pdf(z), 0.0);
}

double expected_improvement(const GpSurrogate& gp, const Vector& point, double f_star) {
  const GpPosterior p = gp.posterior(point);
  return expected_improvement(p.mean, p.std, f_star);
}

}  // namespace hybridml::hyperopt
