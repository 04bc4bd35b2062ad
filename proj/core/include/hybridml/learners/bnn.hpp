#pragma once

#include "hybridml/common.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace hybridml::learners {

struct BnnConfig {
  int hidden = 16;
  double prior_std = 1.0;
  double learning_rate = 0.01;
  int epochs = 600;
  /// Monte-Carlo weight draws per gradient step.
  int train_samples = 2;
  /// Weight draws averaged by predict().
  int predict_samples = 200;
  double init_log_std = -3.0;
  std::uint64_t seed = 1;
};

/// Posterior standard deviations never go below this floor when sampling.
inline constexpr double kMinPosteriorStd = 1e-6;

/// Single-hidden-layer tanh network with a mean-field Gaussian posterior over every weight.
///
/// Parameters are stored flat in the order [W1 (hidden x input, row-major) | b1 | w2 | b2].
struct BnnModel {
  Index input_dim = 0;
  Index hidden = 0;
  Vector mean;
  Vector log_std;
  double prior_std = 1.0;
  int predict_samples = 200;
  std::uint64_t seed = 1;
  /// ELBO estimate at the last training epoch (per-epoch values in elbo_trace).
  double final_elbo = 0.0;
  std::vector<double> elbo_trace;

  Index parameter_count() const noexcept { return hidden * input_dim + 2 * hidden + 1; }

  /// Class-1 probabilities for one concrete weight vector.
  Vector forward(const Matrix& rows, const Vector& weights) const;

  /// Forward pass with every weight at its posterior mean.
  Vector mean_forward(const Matrix& rows) const { return forward(rows, mean); }

  /// Posterior std per parameter, floored at kMinPosteriorStd.
  Vector posterior_std() const;

  /// Mean class-1 probability over `predict_samples` seeded posterior draws.
  Vector predict_proba(const Matrix& rows) const;

  void save(std::ostream& out) const;
  static BnnModel load(std::istream& in);
};

/// Build an untrained model (hidden means ~ N(0, 1/input_dim), output means 0).
BnnModel bnn_init(Index input_dim, const BnnConfig& config);

struct ElboEstimate {
  double elbo = 0.0;
  double log_likelihood = 0.0;
  double kl = 0.0;
  Vector grad_mean;
  Vector grad_log_std;
};

/// Reparameterized ELBO estimate and its exact gradient for fixed standard-normal draws
/// `noise` (one row per draw, parameter_count() columns). Labels are 0/1.
ElboEstimate bnn_elbo(const BnnModel& model, const Matrix& x, const Vector& y, const Matrix& noise);

/// Fits the variational posterior by Adam ascent on the ELBO. Throws Error("learners", ...)
/// naming the epoch if the objective becomes non-finite.
BnnModel bnn_train(const Matrix& x, const Vector& y, const BnnConfig& config);

/// Class-1 probabilities of one sampled weight configuration, one entry per row.
struct PredictiveSample {
  Vector prob;
};

std::vector<PredictiveSample> bnn_predict_samples(const BnnModel& model, const Matrix& rows, int n_samples,
                                                  std::uint64_t seed);

/// Samples-by-rows matrix: entry (s, i) is draw s's probability for row i.
Matrix stack_samples(const std::vector<PredictiveSample>& samples);

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  /// All samples identical: density is a single renormalized spike at the nearest grid point.
  bool degenerate = false;
};

/// Gaussian KDE with Silverman's bandwidth, evaluated on `grid_points` equispaced points of [0,1]
/// and renormalized to unit trapezoid mass.
DensityEstimate bnn_output_density(const Vector& samples, int grid_points = 512);

struct KsResult {
  double statistic = 0.0;
  bool non_degenerate = false;
};

/// One-sample KS distance between the empirical CDF and a point mass at the sample mean.
/// Zero sample variance short-circuits to degenerate.
KsResult ks_degeneracy_check(const Vector& samples, double threshold = 0.05);

/// Law-of-total-variance split of a Bernoulli mixture, per row.
struct UncertaintyReport {
  Vector epistemic;  // Var_s[p]
  Vector aleatoric;  // E_s[p (1 - p)]
  Vector total;
};

UncertaintyReport uncertainty_from_samples(const Matrix& samples_by_rows);
UncertaintyReport bnn_uncertainty(const BnnModel& model, const Matrix& rows, int n_samples, std::uint64_t seed);

/// 1-D synthetic: x ~ U(lo, hi), P(y = 1 | x) = sigmoid(slope * x + intercept).
struct LogisticGenerator {
  double slope = 2.0;
  double intercept = 0.0;
  double lo = -3.0;
  double hi = 3.0;

  double probability(double x) const;
  void sample(Index n, Rng& rng, Matrix& x, Vector& y) const;
};

struct ShrinkageRow {
  Index n_data = 0;
  std::uint64_t seed = 0;
  double mean_epistemic = 0.0;
  double mean_aleatoric = 0.0;
  /// Mean of p(1-p) under the generator on the probe grid.
  double true_aleatoric = 0.0;
};

/// Train a BNN per (size, replicate) on fresh generator data and measure uncertainty on a fixed
/// 21-point probe grid. Sizes must be nondecreasing with at least two entries.
std::vector<ShrinkageRow> epistemic_shrinkage_probe(const LogisticGenerator& generator,
                                                    const std::vector<Index>& sizes, const BnnConfig& config,
                                                    int replicates, std::uint64_t seed);

}  // namespace hybridml::learners
