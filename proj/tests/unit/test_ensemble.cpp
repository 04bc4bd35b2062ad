#include "hybridml/ensemble.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace hybridml::ensemble {
namespace {

RiskMatrix make_risk(const Vector& eps, const Matrix& rho) {
  RiskMatrix r;
  for (Index i = 0; i < eps.size(); ++i) r.names.push_back("m" + std::to_string(i));
  r.epsilon = eps;
  r.rho = rho;
  r.zero_variance.assign(static_cast<std::size_t>(eps.size()), false);
  return r;
}

RiskMatrix two_model(double e1, double e2, double rho12) {
  Vector eps(2);
  eps << e1, e2;
  Matrix rho(2, 2);
  rho << 1, rho12, rho12, 1;
  return make_risk(eps, rho);
}

// Random risk: eps in (0.05, 0.5), rho a correlation matrix built from random factors.
RiskMatrix random_risk(Index n, Rng& rng) {
  std::uniform_real_distribution<double> e(0.05, 0.5);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector eps(n);
  for (Index i = 0; i < n; ++i) eps(i) = e(rng);
  Matrix f(n, n + 2);
  for (Index i = 0; i < f.size(); ++i) f(i) = normal(rng);
  Matrix c = f * f.transpose();
  const Vector d = c.diagonal().cwiseSqrt().cwiseInverse();
  Matrix rho = d.asDiagonal() * c * d.asDiagonal();
  rho = 0.5 * (rho + rho.transpose());
  rho.diagonal().setOnes();
  return make_risk(eps, rho);
}

double literal_double_sum(const Vector& w, const RiskMatrix& r) {
  double e = 0.0;
  for (Index i = 0; i < w.size(); ++i) e += w(i) * w(i) * r.epsilon(i);
  for (Index i = 0; i < w.size(); ++i) {
    for (Index j = 0; j < w.size(); ++j) {
      if (j != i) e += 2.0 * w(i) * w(j) * r.rho(i, j) * r.epsilon(i) * r.epsilon(j);
    }
  }
  return e;
}

TEST(EnsembleError, HandExamples) {
  Vector w1 = Vector::Ones(1);
  EXPECT_DOUBLE_EQ(ensemble_error(w1, make_risk(Vector::Constant(1, 0.2), Matrix::Ones(1, 1))), 0.2);
  Vector w(2);
  w << 1, 0;
  EXPECT_DOUBLE_EQ(ensemble_error(w, two_model(0.3, 0.5, -0.7)), 0.3);
  w << 0.5, 0.5;
  EXPECT_NEAR(ensemble_error(w, two_model(0.1, 0.2, 0.5)), 0.085, 1e-15);
}

TEST(EnsembleError, QuadraticFormMatchesTheDoubleSum) {
  Rng rng(1);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const Index n = 1 + trial % 6;
    const RiskMatrix r = random_risk(n, rng);
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = unif(rng);
    EXPECT_NEAR(ensemble_error(w, r), literal_double_sum(w, r), 1e-12);
  }
}

TEST(Risk, ValidateCatchesBrokenInvariants) {
  RiskMatrix r = two_model(0.1, 0.2, 0.3);
  EXPECT_NO_THROW(r.validate());
  r.rho(0, 1) = 0.4;
  EXPECT_THROW(r.validate(), Error);
  r = two_model(0.1, 1.2, 0.3);
  EXPECT_THROW(r.validate(), Error);
  r = two_model(0.1, 0.2, 1.5);
  EXPECT_THROW(r.validate(), Error);
  r = two_model(0.1, 0.2, 0.3);
  r.rho(1, 1) = 0.9;
  EXPECT_THROW(r.validate(), Error);
}

TEST(Weights, SymmetricRiskGivesUniformWeights) {
  Vector eps = Vector::Constant(4, 0.2);
  Matrix rho = Matrix::Constant(4, 4, 0.3);
  rho.diagonal().setOnes();
  const auto w = optimize_weights(make_risk(eps, rho), EnsembleConfig{});
  EXPECT_LT((w.w.array() - 0.25).abs().maxCoeff(), 1e-12);
}

TEST(Weights, TwoUncorrelatedModels) {
  const auto w = optimize_weights(two_model(0.1, 0.3, 0.0), EnsembleConfig{});
  EXPECT_NEAR(w.w(0), 0.75, 1e-12);
  EXPECT_NEAR(w.w(1), 0.25, 1e-12);
  EXPECT_NEAR(w.objective, 0.075, 1e-12);
  EXPECT_NEAR(w.lambda, 2.0 * w.objective, 1e-12);
  EXPECT_EQ(w.path, SolverPath::closed_form);
  EXPECT_TRUE(w.hessian_positive_definite);
}

TEST(Weights, SimplexOptimalityOnRandomRisk) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = 2 + trial % 5;
    const RiskMatrix r = random_risk(n, rng);
    const auto sol = optimize_weights(r, EnsembleConfig{});
    ASSERT_EQ(sol.w.size(), n);
    EXPECT_NEAR(sol.w.sum(), 1.0, 1e-12);
    EXPECT_GE(sol.w.minCoeff(), 0.0);
    EXPECT_LT(gradient_mapping_norm(r.quadratic(), sol.w), 1e-8) << "trial " << trial;
    for (Index i = 0; i < n; ++i) EXPECT_LE(sol.objective, ensemble_error(Vector::Unit(n, i), r) + 1e-15);
    EXPECT_LE(sol.objective, ensemble_error(Vector::Constant(n, 1.0 / n), r) + 1e-15);
    const auto pg = projected_gradient_weights(r.quadratic());
    EXPECT_NEAR(pg.objective, sol.objective, 1e-10);
  }
}

TEST(Weights, ThreeModelsAgainstASimplexGrid) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const RiskMatrix r = random_risk(3, rng);
    const auto sol = optimize_weights(r, EnsembleConfig{});
    double best = std::numeric_limits<double>::infinity();
    const int steps = 400;
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; a + b <= steps; ++b) {
        Vector w(3);
        w << double(a) / steps, double(b) / steps, double(steps - a - b) / steps;
        best = std::min(best, ensemble_error(w, r));
      }
    }
    EXPECT_LE(sol.objective, best + 1e-15);
    EXPECT_GE(sol.objective, best - 1e-4);
  }
}

TEST(Weights, NegativeClosedFormFallsBackToProjectedGradient) {
  // A strongly correlated weak model pushes the unconstrained solution negative.
  Vector eps(2);
  eps << 0.1, 0.6;
  Matrix rho(2, 2);
  rho << 1, 0.95, 0.95, 1;
  const auto sol = optimize_weights(make_risk(eps, rho), EnsembleConfig{});
  EXPECT_EQ(sol.path, SolverPath::projected_gradient);
  EXPECT_NEAR(sol.w(0), 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 0.1, 1e-12);
}

TEST(Weights, AffineModeSolvesTheLagrangeSystem) {
  Rng rng(4);
  const RiskMatrix r = random_risk(4, rng);
  EnsembleConfig cfg;
  cfg.simplex = false;
  const auto sol = optimize_weights(r, cfg);
  EXPECT_NEAR(sol.w.sum(), 1.0, 1e-12);
  const Vector grad = 2.0 * r.quadratic() * sol.w;
  EXPECT_LT((grad.array() - sol.lambda).abs().maxCoeff(), 1e-10);
  EXPECT_LE(sol.objective, optimize_weights(r, EnsembleConfig{}).objective + 1e-12);
}

TEST(Simplex, ProjectionIsTheNearestSimplexPoint) {
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 1 + trial % 5;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = 2.0 * normal(rng);
    const Vector p = project_to_simplex(v);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    for (int k = 0; k < 50; ++k) {
      Vector z(n);
      for (Index i = 0; i < n; ++i) z(i) = gamma(rng);
      z /= z.sum();
      EXPECT_LE((v - p).norm(), (v - z).norm() + 1e-12);
    }
  }
}

TEST(Diversity, KnownValuesAndPermutationInvariance) {
  EXPECT_DOUBLE_EQ(diversity_score(Matrix::Ones(3, 3)), 0.0);
  EXPECT_DOUBLE_EQ(diversity_score(Matrix::Identity(3, 3)), 1.0);
  EXPECT_NEAR(diversity_score(two_model(0.1, 0.2, 0.4).rho), 0.6, 1e-15);
  EXPECT_THROW(diversity_score(Matrix::Ones(1, 1)), Error);

  Rng rng(6);
  const RiskMatrix r = random_risk(5, rng);
  std::vector<int> order{0, 1, 2, 3, 4};
  std::shuffle(order.begin(), order.end(), rng);
  Matrix permuted(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) permuted(i, j) = r.rho(order[i], order[j]);
  }
  EXPECT_NEAR(diversity_score(permuted), diversity_score(r.rho), 1e-15);
}

TEST(CombinedLoss, HandExamples) {
  const RiskMatrix r = two_model(0.1, 0.2, 0.4);
  Vector w(2);
  w << 0.5, 0.5;
  EXPECT_NEAR(combined_loss(w, r, EnsembleConfig{1.0, 0.5, true}), -0.15, 1e-15);
  EXPECT_NEAR(combined_loss(w, r, EnsembleConfig{2.0, 0.0, true}), 2.0 * 0.15, 1e-15);
  EXPECT_NEAR(combined_loss(w, r, EnsembleConfig{0.0, 1.0, true}), -0.6, 1e-15);
  const auto sweep = tradeoff_sweep(w, r, {0.0, 1.0}, {0.0, 0.5, 1.0});
  ASSERT_EQ(sweep.size(), 6u);
  for (const auto& p : sweep) EXPECT_NEAR(p.loss, p.alpha * 0.15 - p.beta * 0.6, 1e-15);
}

TEST(Errors, EstimatesFromPredictions) {
  Vector y(4);
  y << 0, 1, 0, 1;
  const Vector errors = estimate_errors({y, Vector::Constant(4, 0.5)}, y);
  EXPECT_EQ(errors(0), 0.0);
  EXPECT_EQ(errors(1), 0.5);
}

TEST(Errors, ResidualCorrelation) {
  Vector y(5);
  y << 0, 1, 1, 0, 1;
  Vector r(5);
  r << 0.1, -0.2, 0.05, 0.3, -0.1;
  const Vector p1 = y + r, p2 = y - r;
  const auto rc = residual_correlation({p1, p1, p2}, y);
  EXPECT_DOUBLE_EQ(rc.rho(0, 0), 1.0);
  EXPECT_NEAR(rc.rho(0, 1), 1.0, 1e-15);
  EXPECT_NEAR(rc.rho(0, 2), -1.0, 1e-15);
  Vector a(3), b(3), y3 = Vector::Zero(3);
  a << 1, 2, 3;
  b << 1, 2, 4;
  EXPECT_NEAR(residual_correlation({a, b}, y3).rho(0, 1), 0.9820, 1e-4);
  const auto flat = residual_correlation({a, Vector::Zero(3)}, y3);
  EXPECT_TRUE(flat.zero_variance[1]);
  EXPECT_EQ(flat.rho(0, 1), 0.0);
  EXPECT_THROW(residual_correlation({a.head(2), b.head(2)}, y3.head(2)), Error);
}

TEST(Predict, WeightedAverageAndClipping) {
  const Vector a = Vector::Constant(3, 0.2), b = Vector::Constant(3, 0.6);
  Vector w(2);
  w << 0.5, 0.5;
  EXPECT_LT((ensemble_predict({a, b}, w).array() - 0.4).abs().maxCoeff(), 1e-15);
  EXPECT_EQ(ensemble_predict({a}, Vector::Ones(1)), a);
  w << 2.0, -1.0;
  EXPECT_EQ(ensemble_predict({Vector::Ones(3), Vector::Zero(3)}, w), Vector::Ones(3));
}

}  // namespace
}  // namespace hybridml::ensemble
