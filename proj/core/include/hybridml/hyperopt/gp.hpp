#pragma once

#include "hybridml/common.hpp"

#include <string>
#include <vector>

namespace hybridml::hyperopt {

struct SearchDimension {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  /// Values are rounded to the nearest integer when mapped out of the unit cube.
  bool integer = false;
  /// Unit coordinate is linear in log(value); needs lower > 0.
  bool log_scale = false;
};

/// Box-shaped search space; the optimizer works in the unit cube [0,1]^d.
struct SearchSpace {
  std::vector<SearchDimension> dims;

  Index size() const noexcept { return static_cast<Index>(dims.size()); }
  void validate() const;

  Vector to_unit(const Vector& x) const;
  /// Clamps to [0,1] first; rounds integer dimensions.
  Vector from_unit(const Vector& u) const;
  /// to_unit(from_unit(u)): the unit point actually evaluated.
  Vector snap(const Vector& u) const;
};

struct GpConfig {
  double noise_variance = 1e-6;
  /// Candidate length-scales in unit-cube coordinates.
  std::vector<double> length_scales{0.05, 0.08, 0.13, 0.2, 0.32, 0.5, 0.8, 1.3};
  /// Candidate signal std-devs as multiples of signal_reference.
  std::vector<double> signal_scales{0.25, 0.4, 0.63, 1.0, 1.6, 2.5, 4.0, 6.3};
  /// Scale for signal_scales; <= 0 means the population std-dev of the observed values (1 if zero).
  double signal_reference = 0.0;
  double initial_jitter = 1e-10;
  double max_jitter = 1e-6;
};

struct GpPosterior {
  double mean = 0.0;
  /// sqrt of the clamped variance.
  double std = 0.0;
  /// Variance before clamping at 0.
  double raw_variance = 0.0;
};

/// Squared-exponential GP with constant mean equal to the mean of the observed values.
struct GpSurrogate {
  Matrix x;
  Vector f;
  double prior_mean = 0.0;
  double length_scale = 1.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;
  /// Extra diagonal added so the Cholesky factorization succeeds.
  double jitter = 0.0;
  /// Lower Cholesky factor of K + (noise + jitter) I.
  Matrix chol;
  /// (K + (noise + jitter) I)^{-1} (f - prior_mean).
  Vector weights;
  double log_marginal_likelihood = 0.0;

  Index size() const noexcept { return x.rows(); }
  double kernel(const Vector& a, const Vector& b) const;
  GpPosterior posterior(const Vector& point) const;
};

/// Fits hyperparameters by maximizing the log marginal likelihood over the configured grid.
/// Needs at least 2 observations. Throws Error("hyperopt", ...) if no grid point factorizes
/// even at max_jitter.
GpSurrogate gp_fit(const Matrix& x, const Vector& f, const GpConfig& config);

/// Factorizes with fixed hyperparameters (jitter escalates from initial to max).
GpSurrogate gp_fit_fixed(const Matrix& x, const Vector& f, double length_scale, double signal_variance,
                         const GpConfig& config);

/// Appends one observation by extending the Cholesky factor by a row, hyperparameters frozen.
/// The prior mean is refreshed so the result matches gp_fit_fixed on the enlarged data.
/// Returns false (leaving gp unchanged) if the new pivot is not positive.
bool gp_extend(GpSurrogate& gp, const Vector& point, double value);

/// Minimization EI: (f* - mu) Phi(z) + sigma phi(z) with z = (f* - mu) / sigma; max(f* - mu, 0) at sigma = 0.
double expected_improvement(double mean, double std, double f_star);
double expected_improvement(const GpSurrogate& gp, const Vector& point, double f_star);

}  // namespace hybridml::hyperopt
