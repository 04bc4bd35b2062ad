#include "hybridml/learners.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace hybridml::learners {
namespace {

LearnerConfigs small_configs() {
  LearnerConfigs c;
  c.bnn.epochs = 40;
  c.bnn.predict_samples = 100;
  c.rf.n_trees = 10;
  c.gb.iterations = 10;
  return c;
}

void noisy_linear(Index n, std::uint64_t seed, Matrix& x, Vector& y) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  x.resize(n, 3);
  y.resize(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < 3; ++j) x(i, j) = normal(rng);
    y(i) = x(i, 0) - 0.5 * x(i, 2) + 0.5 * normal(rng) > 0 ? 1.0 : 0.0;
  }
}

TEST(Learners, NamesRoundTrip) {
  for (auto kind : kAllLearners) EXPECT_EQ(learner_from_name(learner_name(kind)), kind);
  EXPECT_EQ(learner_name(LearnerKind::bnn), "BNN");
  EXPECT_THROW(learner_from_name("XGB"), Error);
}

TEST(Learners, EveryKindPredictsProbabilitiesDeterministically) {
  Matrix x;
  Vector y;
  noisy_linear(60, 1, x, y);
  const auto cfg = small_configs();
  for (auto kind : kAllLearners) {
    const AnyModel m = train(kind, x, y, cfg);
    EXPECT_EQ(kind_of(m), kind);
    const Vector p = predict(m, x);
    ASSERT_EQ(p.size(), 60);
    EXPECT_GE(p.minCoeff(), 0.0) << learner_name(kind);
    EXPECT_LE(p.maxCoeff(), 1.0) << learner_name(kind);
    EXPECT_LT(misclassification_rate(p, y), 0.4) << learner_name(kind);
    EXPECT_EQ(predict(train(kind, x, y, cfg), x), p) << learner_name(kind);
    EXPECT_THROW(predict(m, Matrix::Zero(2, 4)), Error) << learner_name(kind);
  }
}

TEST(Learners, ModelFilesRoundTrip) {
  Matrix x;
  Vector y;
  noisy_linear(50, 2, x, y);
  for (auto kind : kAllLearners) {
    const AnyModel m = train(kind, x, y, small_configs());
    std::stringstream buffer;
    save_model(buffer, m);
    const std::string text = buffer.str();
    EXPECT_EQ(text.rfind("hybridml-model 1\nkind " + std::string(learner_name(kind)) + "\n", 0), 0u) << text.substr(0, 40);
    const AnyModel r = load_model(buffer);
    EXPECT_EQ(kind_of(r), kind);
    EXPECT_EQ(predict(r, x), predict(m, x)) << learner_name(kind);
    std::stringstream again;
    save_model(again, r);
    EXPECT_EQ(again.str(), text);
  }
}

TEST(Learners, ModelFilesRejectUnknownVersionsAndKinds) {
  std::istringstream future("hybridml-model 2\nkind RF\n");
  EXPECT_THROW(load_model(future), Error);
  std::istringstream unknown("hybridml-model 1\nkind KNN\n");
  EXPECT_THROW(load_model(unknown), Error);
  std::istringstream junk("not a model\n");
  EXPECT_THROW(load_model(junk), Error);
}

}  // namespace
}  // namespace hybridml::learners
