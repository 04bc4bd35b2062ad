#include "hybridml/learners/bnn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace hybridml::learners {
namespace {

// Two Gaussian blobs around (-1.5, -1.5) and (1.5, 1.5), labels by blob.
void separable_blobs(Index n, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  x.resize(n, 2);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double c = i % 2 ? 1.5 : -1.5;
    x(i, 0) = c + noise(rng);
    x(i, 1) = c + noise(rng);
    y(i) = i % 2;
  }
}

BnnModel zero_posterior(Index input_dim, Index hidden) {
  BnnConfig cfg;
  cfg.hidden = static_cast<int>(hidden);
  BnnModel m = bnn_init(input_dim, cfg);
  m.mean.setZero();
  m.log_std.setConstant(-60.0);
  return m;
}

TEST(Bnn, ElboGradientMatchesCentralDifferences) {
  Matrix x;
  Vector y;
  separable_blobs(40, 3, x, y);
  BnnConfig cfg;
  cfg.hidden = 5;
  BnnModel m = bnn_init(2, cfg);
  Rng rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> log_std(-3.0, -0.5);
  for (Index j = 0; j < m.parameter_count(); ++j) {
    m.mean(j) = 0.7 * normal(rng);
    m.log_std(j) = log_std(rng);
  }
  Matrix noise(3, m.parameter_count());
  for (Index i = 0; i < noise.size(); ++i) noise(i) = normal(rng);
  const ElboEstimate e = bnn_elbo(m, x, y, noise);

  std::uniform_int_distribution<Index> pick(0, m.parameter_count() - 1);
  const double h = 1e-5;
  for (int probe = 0; probe < 10; ++probe) {
    const Index j = pick(rng);
    for (bool on_std : {false, true}) {
      Vector& target = on_std ? m.log_std : m.mean;
      const double saved = target(j);
      target(j) = saved + h;
      const double up = bnn_elbo(m, x, y, noise).elbo;
      target(j) = saved - h;
      const double down = bnn_elbo(m, x, y, noise).elbo;
      target(j) = saved;
      const double fd = (up - down) / (2.0 * h);
      const double an = on_std ? e.grad_log_std(j) : e.grad_mean(j);
      EXPECT_LT(std::abs(fd - an), 1e-4 * std::max(std::abs(fd), std::abs(an)))
          << (on_std ? "log_std" : "mean") << " param " << j << " fd " << fd << " analytic " << an;
    }
  }
}

TEST(Bnn, KlVanishesWhenPosteriorEqualsPrior) {
  BnnModel m = zero_posterior(2, 3);
  m.log_std.setConstant(std::log(m.prior_std));
  Matrix x = Matrix::Zero(1, 2);
  Vector y = Vector::Zero(1);
  const auto e = bnn_elbo(m, x, y, Matrix::Zero(1, m.parameter_count()));
  EXPECT_NEAR(e.kl, 0.0, 1e-12);
  EXPECT_NEAR(e.log_likelihood, std::log(0.5), 1e-12);
}

TEST(Bnn, LearnsSeparableData) {
  Matrix x;
  Vector y;
  separable_blobs(200, 5, x, y);
  BnnConfig cfg;
  cfg.hidden = 8;
  cfg.epochs = 300;
  const BnnModel m = bnn_train(x, y, cfg);
  EXPECT_LT(misclassification_rate(m.predict_proba(x), y), 0.05);
}

TEST(Bnn, UntrainedModelPredictsNearHalf) {
  Matrix x;
  Vector y;
  separable_blobs(30, 5, x, y);
  BnnConfig cfg;
  cfg.epochs = 0;
  const BnnModel m = bnn_train(x, y, cfg);
  EXPECT_TRUE(m.elbo_trace.empty());
  const Vector p = m.predict_proba(x);
  EXPECT_LT((p.array() - 0.5).abs().maxCoeff(), 0.05);
}

TEST(Bnn, TrainingIsDeterministicUnderSeed) {
  Matrix x;
  Vector y;
  separable_blobs(40, 2, x, y);
  BnnConfig cfg;
  cfg.epochs = 50;
  const BnnModel a = bnn_train(x, y, cfg);
  const BnnModel b = bnn_train(x, y, cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.log_std, b.log_std);
  cfg.seed = 2;
  EXPECT_NE(bnn_train(x, y, cfg).mean, a.mean);
}

TEST(Bnn, NonFiniteInputIsReported) {
  Matrix x(2, 1);
  x << 1.0, std::numeric_limits<double>::infinity();
  Vector y(2);
  y << 0, 1;
  EXPECT_THROW(bnn_train(x, y, BnnConfig{}), Error);
}

TEST(Bnn, DegeneratePosteriorSamplesEqualTheMeanForwardPass) {
  Matrix x;
  Vector y;
  separable_blobs(20, 1, x, y);
  BnnConfig cfg;
  cfg.epochs = 30;
  BnnModel m = bnn_train(x, y, cfg);
  m.log_std.setConstant(-80.0);
  const auto samples = bnn_predict_samples(m, x, 1, 9);
  ASSERT_EQ(samples.size(), 1u);
  EXPECT_LT((samples[0].prob - m.mean_forward(x)).cwiseAbs().maxCoeff(), 1e-4);
  EXPECT_LT((m.predict_proba(x) - m.mean_forward(x)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Bnn, SampleMeanStabilizes) {
  Matrix x;
  Vector y;
  separable_blobs(20, 1, x, y);
  BnnConfig cfg;
  cfg.epochs = 0;
  cfg.init_log_std = 0.0;
  const BnnModel m = bnn_train(x, y, cfg);
  const Matrix s = stack_samples(bnn_predict_samples(m, x.topRows(1), 1000, 4));
  const Vector col = s.col(0);
  const double sd = std::sqrt((col.array() - col.mean()).square().sum() / 999.0);
  EXPECT_LT(sd / std::sqrt(1000.0), 0.02);
  EXPECT_GT(sd, 0.0);
  const Matrix other = stack_samples(bnn_predict_samples(m, x.topRows(1), 1000, 5));
  EXPECT_NE(s, other);
}

TEST(Bnn, DensityOfConstantSamplesIsDegenerate) {
  const DensityEstimate d = bnn_output_density(Vector::Constant(50, 0.5));
  EXPECT_TRUE(d.degenerate);
}

TEST(Bnn, DensityOfUniformSamplesIsFlatInside) {
  Vector s(601);
  for (Index i = 0; i < s.size(); ++i) s(i) = 0.2 + 0.6 * static_cast<double>(i) / 600.0;
  const DensityEstimate d = bnn_output_density(s, 201);
  EXPECT_FALSE(d.degenerate);
  double mass = 0.0;
  for (std::size_t k = 0; k + 1 < d.grid.size(); ++k) mass += 0.5 * (d.grid[k + 1] - d.grid[k]) * (d.density[k] + d.density[k + 1]);
  EXPECT_NEAR(mass, 1.0, 1e-12);
  for (std::size_t k = 0; k < d.grid.size(); ++k) {
    if (d.grid[k] < 0.3 || d.grid[k] > 0.7) continue;
    EXPECT_NEAR(d.density[k], 1.0 / 0.6, 0.15 / 0.6) << "at " << d.grid[k];
  }
}

TEST(Bnn, KsCheck) {
  EXPECT_FALSE(ks_degeneracy_check(Vector::Constant(40, 0.3)).non_degenerate);
  Vector alt(40);
  for (Index i = 0; i < alt.size(); ++i) alt(i) = i % 2 ? 0.6 : 0.4;
  const KsResult r = ks_degeneracy_check(alt);
  EXPECT_TRUE(r.non_degenerate);
  EXPECT_DOUBLE_EQ(r.statistic, 0.5);
  // Brute-force sup distance between the empirical CDF and a point mass at the mean.
  Rng rng(3);
  std::gamma_distribution<double> ga(2.0, 1.0), gb(5.0, 1.0);
  Vector beta(200);
  for (Index i = 0; i < beta.size(); ++i) {
    const double a = ga(rng);
    beta(i) = a / (a + gb(rng));
  }
  const double mean = beta.mean();
  double sup = 0.0;
  for (Index i = 0; i < beta.size(); ++i) {
    const double t = beta(i);
    const double ecdf = static_cast<double>((beta.array() <= t).count()) / 200.0;
    const double ecdf_left = static_cast<double>((beta.array() < t).count()) / 200.0;
    const double point = t >= mean ? 1.0 : 0.0;
    sup = std::max({sup, std::abs(ecdf - point), std::abs(ecdf_left - (t > mean ? 1.0 : 0.0))});
  }
  const KsResult wide = ks_degeneracy_check(beta);
  EXPECT_TRUE(wide.non_degenerate);
  EXPECT_NEAR(wide.statistic, sup, 1e-12);
}

TEST(Bnn, UncertaintyOfHandBuiltSamples) {
  Matrix coin(2, 1);
  coin << 0.0, 1.0;
  const auto a = uncertainty_from_samples(coin);
  EXPECT_DOUBLE_EQ(a.epistemic(0), 0.25);
  EXPECT_DOUBLE_EQ(a.aleatoric(0), 0.0);

  const BnnModel m = zero_posterior(3, 4);
  const auto b = bnn_uncertainty(m, Matrix::Random(5, 3), 200, 1);
  EXPECT_LT(b.epistemic.maxCoeff(), 1e-12);
  EXPECT_NEAR(b.aleatoric.minCoeff(), 0.25, 1e-12);
}

TEST(Bnn, UncertaintyIsAdditiveForArbitrarySamples) {
  Rng rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix s(1 + trial, 7);
    for (Index i = 0; i < s.size(); ++i) s(i) = unif(rng);
    const auto u = uncertainty_from_samples(s);
    for (Index j = 0; j < 7; ++j) EXPECT_EQ(u.total(j), u.epistemic(j) + u.aleatoric(j));
  }
}

TEST(Bnn, ShrinkageProbeValidatesSizes) {
  BnnConfig cfg;
  cfg.epochs = 5;
  cfg.predict_samples = 100;
  EXPECT_THROW(epistemic_shrinkage_probe(LogisticGenerator{}, {100}, cfg, 1, 1), Error);
  EXPECT_THROW(epistemic_shrinkage_probe(LogisticGenerator{}, {100, 50}, cfg, 1, 1), Error);
  const auto rows = epistemic_shrinkage_probe(LogisticGenerator{}, {40, 40}, cfg, 2, 1);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    EXPECT_GE(r.mean_epistemic, 0.0);
    EXPECT_GT(r.true_aleatoric, 0.0);
  }
}

TEST(Bnn, SaveLoadRoundTrip) {
  Matrix x;
  Vector y;
  separable_blobs(20, 1, x, y);
  BnnConfig cfg;
  cfg.epochs = 10;
  const BnnModel m = bnn_train(x, y, cfg);
  std::stringstream buffer;
  m.save(buffer);
  const BnnModel r = BnnModel::load(buffer);
  EXPECT_EQ(r.mean, m.mean);
  EXPECT_EQ(r.log_std, m.log_std);
  EXPECT_EQ(r.predict_proba(x), m.predict_proba(x));
}

}  // namespace
}  // namespace hybridml::learners
