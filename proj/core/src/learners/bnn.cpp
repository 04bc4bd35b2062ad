#include "hybridml/learners/bnn.hpp"

#include "hybridml/adam.hpp"
#include "../model_io.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hybridml::learners {

namespace {

constexpr const char* kModule = "learners";

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Layout {
  Index input;
  Index hidden;
  Index w1() const { return 0; }
  Index b1() const { return hidden * input; }
  Index w2() const { return hidden * input + hidden; }
  Index b2() const { return hidden * input + 2 * hidden; }
};

struct ForwardCache {
  Matrix activations;  // n x hidden
  Vector logits;
};

ForwardCache forward_pass(const Layout& l, const Matrix& x, const Vector& w) {
  const Eigen::Map<const RowMajor> w1(w.data() + l.w1(), l.hidden, l.input);
  ForwardCache c;
  c.activations = ((x * w1.transpose()).rowwise() + w.segment(l.b1(), l.hidden).transpose()).array().tanh();
  c.logits = (c.activations * w.segment(l.w2(), l.hidden)).array() + w(l.b2());
  return c;
}

/// Bernoulli log-likelihood of `y` under logits and its gradient with respect to `w`.
double log_likelihood_and_grad(const Layout& l, const Matrix& x, const Vector& y, const Vector& w, Vector& grad) {
  const ForwardCache c = forward_pass(l, x, w);
  double ll = 0.0;
  Vector dz(c.logits.size());
  for (Index i = 0; i < c.logits.size(); ++i) {
    ll += y(i) * c.logits(i) - softplus(c.logits(i));
    dz(i) = y(i) - sigmoid(c.logits(i));
  }
  grad.resize(w.size());
  grad.segment(l.w2(), l.hidden) = c.activations.transpose() * dz;
  grad(l.b2()) = dz.sum();
  const Matrix dpre = ((dz * w.segment(l.w2(), l.hidden).transpose()).array() * (1.0 - c.activations.array().square()))
                          .matrix();
  Eigen::Map<RowMajor> gw1(grad.data() + l.w1(), l.hidden, l.input);
  gw1 = dpre.transpose() * x;
  grad.segment(l.b1(), l.hidden) = dpre.colwise().sum().transpose();
  return ll;
}

void check_rows(const BnnModel& m, const Matrix& rows) {
  if (rows.cols() != m.input_dim) {
    throw Error(kModule, "BNN expects " + std::to_string(m.input_dim) + " features, got " +
                             std::to_string(rows.cols()));
  }
}

Matrix standard_normal(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

}  // namespace

Vector BnnModel::forward(const Matrix& rows, const Vector& weights) const {
  check_rows(*this, rows);
  if (weights.size() != parameter_count()) throw Error(kModule, "BNN weight vector has the wrong length");
  const Vector logits = forward_pass({input_dim, hidden}, rows, weights).logits;
  return logits.unaryExpr([](double z) { return sigmoid(z); });
}

Vector BnnModel::posterior_std() const {
  return log_std.unaryExpr([](double s) { return std::max(std::exp(s), kMinPosteriorStd); });
}

Vector BnnModel::predict_proba(const Matrix& rows) const {
  const auto samples = bnn_predict_samples(*this, rows, predict_samples, seed);
  Vector mean_prob = Vector::Zero(rows.rows());
  for (const auto& s : samples) mean_prob += s.prob;
  return mean_prob / static_cast<double>(samples.size());
}

void BnnModel::save(std::ostream& out) const {
  model_io::Writer w(out);
  w.field("input_dim", static_cast<long long>(input_dim))
      .field("hidden", static_cast<long long>(hidden))
      .field("prior_std", prior_std)
      .field("predict_samples", static_cast<long long>(predict_samples))
      .field("seed", std::to_string(seed))
      .field("final_elbo", final_elbo)
      .field("mean", mean)
      .field("log_std", log_std);
}

BnnModel BnnModel::load(std::istream& in) {
  model_io::Reader r(in);
  BnnModel m;
  m.input_dim = static_cast<Index>(r.integer("input_dim"));
  m.hidden = static_cast<Index>(r.integer("hidden"));
  m.prior_std = r.real("prior_std");
  m.predict_samples = static_cast<int>(r.integer("predict_samples"));
  m.seed = std::stoull(r.word("seed"));
  m.final_elbo = r.real("final_elbo");
  m.mean = r.vector("mean");
  m.log_std = r.vector("log_std");
  if (m.mean.size() != m.parameter_count() || m.log_std.size() != m.parameter_count()) {
    throw Error(kModule, "BNN parameter vectors do not match the layer sizes");
  }
  return m;
}

BnnModel bnn_init(Index input_dim, const BnnConfig& config) {
  if (input_dim < 1 || config.hidden < 1) throw Error(kModule, "BNN needs input and hidden sizes >= 1");
  if (!(config.prior_std > 0)) throw Error(kModule, "BNN prior std must be positive");
  BnnModel m;
  m.input_dim = input_dim;
  m.hidden = config.hidden;
  m.prior_std = config.prior_std;
  m.predict_samples = config.predict_samples;
  m.seed = config.seed;
  const Layout l{input_dim, m.hidden};
  m.mean = Vector::Zero(m.parameter_count());
  m.log_std = Vector::Constant(m.parameter_count(), config.init_log_std);
  Rng rng(derive_seed(config.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(input_dim)));
  for (Index i = l.w1(); i < l.b1(); ++i) m.mean(i) = normal(rng);
  return m;
}

ElboEstimate bnn_elbo(const BnnModel& model, const Matrix& x, const Vector& y, const Matrix& noise) {
  check_rows(model, x);
  if (noise.cols() != model.parameter_count() || noise.rows() < 1) {
    throw Error(kModule, "noise matrix must have one column per variational parameter");
  }
  const Layout l{model.input_dim, model.hidden};
  const Index p = model.parameter_count();
  const auto draws = static_cast<double>(noise.rows());

  Vector sd(p);
  std::vector<bool> floored(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    const double s = std::exp(model.log_std(j));
    floored[static_cast<std::size_t>(j)] = s < kMinPosteriorStd;
    sd(j) = std::max(s, kMinPosteriorStd);
  }

  ElboEstimate e;
  e.grad_mean = Vector::Zero(p);
  e.grad_log_std = Vector::Zero(p);
  Vector grad;
  for (Index s = 0; s < noise.rows(); ++s) {
    const Vector eps = noise.row(s).transpose();
    const Vector w = model.mean + sd.cwiseProduct(eps);
    e.log_likelihood += log_likelihood_and_grad(l, x, y, w, grad) / draws;
    e.grad_mean += grad / draws;
    for (Index j = 0; j < p; ++j) {
      if (!floored[static_cast<std::size_t>(j)]) e.grad_log_std(j) += grad(j) * eps(j) * sd(j) / draws;
    }
  }

  // KL(N(mu, sd^2) || N(0, prior^2)) summed over parameters.
  const double prior_var = model.prior_std * model.prior_std;
  for (Index j = 0; j < p; ++j) {
    const double mu = model.mean(j);
    const double var = sd(j) * sd(j);
    e.kl += std::log(model.prior_std / sd(j)) + (var + mu * mu) / (2.0 * prior_var) - 0.5;
    e.grad_mean(j) -= mu / prior_var;
    if (!floored[static_cast<std::size_t>(j)]) e.grad_log_std(j) -= var / prior_var - 1.0;
  }
  e.elbo = e.log_likelihood - e.kl;
  return e;
}

BnnModel bnn_train(const Matrix& x, const Vector& y, const BnnConfig& config) {
  if (x.rows() != y.size() || x.rows() == 0) throw Error(kModule, "BNN training data shape mismatch");
  if (config.epochs < 0 || config.train_samples < 1) throw Error(kModule, "invalid BNN epochs/train_samples");
  BnnModel m = bnn_init(x.cols(), config);
  const Index p = m.parameter_count();
  Rng rng(derive_seed(config.seed, 1));
  AdamState adam;
  adam.reset(2 * p);
  Vector params(2 * p);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const Matrix noise = standard_normal(config.train_samples, p, rng);
    const ElboEstimate e = bnn_elbo(m, x, y, noise);
    if (!std::isfinite(e.elbo) || !e.grad_mean.allFinite() || !e.grad_log_std.allFinite()) {
      throw Error(kModule, "BNN training diverged (non-finite ELBO) at epoch " + std::to_string(epoch));
    }
    m.elbo_trace.push_back(e.elbo);
    Vector grad(2 * p);
    grad << -e.grad_mean, -e.grad_log_std;
    const Vector delta = adam.step_for(grad, config.learning_rate);
    m.mean -= delta.head(p);
    m.log_std -= delta.tail(p);
  }
  if (m.elbo_trace.empty()) {
    m.final_elbo = bnn_elbo(m, x, y, standard_normal(1, p, rng)).elbo;
  } else {
    m.final_elbo = m.elbo_trace.back();
  }
  return m;
}

std::vector<PredictiveSample> bnn_predict_samples(const BnnModel& model, const Matrix& rows, int n_samples,
                                                  std::uint64_t seed) {
  check_rows(model, rows);
  if (n_samples < 1) throw Error(kModule, "need at least one predictive sample");
  Rng rng(derive_seed(seed, 2));
  const Vector sd = model.posterior_std();
  std::vector<PredictiveSample> out;
  out.reserve(static_cast<std::size_t>(n_samples));
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(model.parameter_count());
  for (int s = 0; s < n_samples; ++s) {
    for (Index j = 0; j < w.size(); ++j) w(j) = model.mean(j) + sd(j) * normal(rng);
    out.push_back({model.forward(rows, w)});
  }
  return out;
}

Matrix stack_samples(const std::vector<PredictiveSample>& samples) {
  if (samples.empty()) throw Error(kModule, "no predictive samples");
  Matrix out(static_cast<Index>(samples.size()), samples.front().prob.size());
  for (std::size_t s = 0; s < samples.size(); ++s) out.row(static_cast<Index>(s)) = samples[s].prob.transpose();
  return out;
}

DensityEstimate bnn_output_density(const Vector& samples, int grid_points) {
  if (samples.size() < 10) throw Error(kModule, "density estimation needs at least 10 samples");
  if (grid_points < 3) throw Error(kModule, "density grid needs at least 3 points");
  DensityEstimate d;
  const double step = 1.0 / (grid_points - 1);
  for (int k = 0; k < grid_points; ++k) d.grid.push_back(k * step);
  d.density.assign(static_cast<std::size_t>(grid_points), 0.0);

  const double lo = samples.minCoeff();
  const double hi = samples.maxCoeff();
  if (hi == lo) {
    d.degenerate = true;
    const auto k = static_cast<std::size_t>(std::clamp(std::lround(lo / step), 0L, static_cast<long>(grid_points - 1)));
    // Trapezoid weight is step/2 at the ends and step inside.
    const bool end = k == 0 || k + 1 == d.grid.size();
    d.density[k] = end ? 2.0 / step : 1.0 / step;
    return d;
  }

  const auto n = static_cast<double>(samples.size());
  const double mean = samples.mean();
  const double sd = std::sqrt((samples.array() - mean).square().sum() / (n - 1.0));
  std::vector<double> sorted(samples.data(), samples.data() + samples.size());
  std::sort(sorted.begin(), sorted.end());
  auto quantile = [&](double q) {
    const double pos = q * (n - 1.0);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(i);
    return i + 1 < sorted.size() ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac : sorted[i];
  };
  const double iqr = quantile(0.75) - quantile(0.25);
  const double spread = iqr > 0 ? std::min(sd, iqr / 1.34) : sd;
  d.bandwidth = 0.9 * spread * std::pow(n, -0.2);

  const double norm = 1.0 / (n * d.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t k = 0; k < d.grid.size(); ++k) {
    double acc = 0.0;
    for (double s : sorted) {
      const double u = (d.grid[k] - s) / d.bandwidth;
      acc += std::exp(-0.5 * u * u);
    }
    d.density[k] = acc * norm;
  }
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < d.grid.size(); ++k) mass += 0.5 * step * (d.density[k] + d.density[k + 1]);
  for (auto& v : d.density) v /= mass;
  return d;
}

KsResult ks_degeneracy_check(const Vector& samples, double threshold) {
  if (samples.size() < 20) throw Error(kModule, "KS degeneracy check needs at least 20 samples");
  // The floating-point mean of identical values can differ from them, so test the spread directly.
  if (samples.minCoeff() == samples.maxCoeff()) return {0.0, false};
  const double mean = samples.mean();
  // The point-mass CDF jumps from 0 to 1 at the mean, so the sup distance is attained just
  // below or at the mean.
  const auto n = static_cast<double>(samples.size());
  const double below = static_cast<double>((samples.array() < mean).count()) / n;
  const double above = static_cast<double>((samples.array() > mean).count()) / n;
  const double stat = std::max(below, above);
  return {stat, stat > threshold};
}

UncertaintyReport uncertainty_from_samples(const Matrix& samples_by_rows) {
  if (samples_by_rows.rows() < 1) throw Error(kModule, "no predictive samples");
  UncertaintyReport r;
  const Vector mean = samples_by_rows.colwise().mean().transpose();
  r.epistemic = (samples_by_rows.rowwise() - mean.transpose()).array().square().colwise().mean().transpose();
  r.aleatoric = (samples_by_rows.array() * (1.0 - samples_by_rows.array())).colwise().mean().transpose();
  r.total = r.epistemic + r.aleatoric;
  return r;
}

UncertaintyReport bnn_uncertainty(const BnnModel& model, const Matrix& rows, int n_samples, std::uint64_t seed) {
  if (n_samples < 100) throw Error(kModule, "uncertainty decomposition needs at least 100 samples");
  return uncertainty_from_samples(stack_samples(bnn_predict_samples(model, rows, n_samples, seed)));
}

double LogisticGenerator::probability(double x) const { return sigmoid(slope * x + intercept); }

void LogisticGenerator::sample(Index n, Rng& rng, Matrix& x, Vector& y) const {
  std::uniform_real_distribution<double> unif(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  x.resize(n, 1);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = unif(rng);
    y(i) = coin(rng) < probability(x(i, 0)) ? 1.0 : 0.0;
  }
}

std::vector<ShrinkageRow> epistemic_shrinkage_probe(const LogisticGenerator& generator,
                                                    const std::vector<Index>& sizes, const BnnConfig& config,
                                                    int replicates, std::uint64_t seed) {
  if (sizes.size() < 2) throw Error(kModule, "shrinkage probe needs at least two sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] < 2 || (i > 0 && sizes[i] < sizes[i - 1])) {
      throw Error(kModule, "shrinkage probe sizes must be >= 2 and nondecreasing");
    }
  }
  if (replicates < 1) throw Error(kModule, "shrinkage probe needs at least one replicate");

  constexpr Index kProbePoints = 21;
  const double span = (generator.hi - generator.lo) / 3.0;
  Matrix probe(kProbePoints, 1);
  double true_aleatoric = 0.0;
  for (Index k = 0; k < kProbePoints; ++k) {
    probe(k, 0) = generator.lo + span + 2.0 * span * static_cast<double>(k) / (kProbePoints - 1);
    const double p = generator.probability(probe(k, 0));
    true_aleatoric += p * (1.0 - p) / kProbePoints;
  }

  std::vector<ShrinkageRow> rows;
  for (int r = 0; r < replicates; ++r) {
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const std::uint64_t run_seed = derive_seed(seed, static_cast<std::uint64_t>(r) * 1000 + i);
      Rng rng(run_seed);
      Matrix x;
      Vector y;
      generator.sample(sizes[i], rng, x, y);
      BnnConfig cfg = config;
      cfg.seed = run_seed;
      const BnnModel m = bnn_train(x, y, cfg);
      const auto u = bnn_uncertainty(m, probe, std::max(config.predict_samples, 200), derive_seed(run_seed, 7));
      rows.push_back({sizes[i], run_seed, u.epistemic.mean(), u.aleatoric.mean(), true_aleatoric});
    }
  }
  return rows;
}

}  // namespace hybridml::learners
