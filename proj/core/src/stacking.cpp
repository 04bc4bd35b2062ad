#include "hybridml/stacking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridml::stacking {

namespace {

constexpr const char* kModule = "stacking";

Matrix columns_of(const std::vector<Vector>& preds) {
  if (preds.empty()) throw Error(kModule, "no base predictions");
  Matrix f(preds.front().size(), static_cast<Index>(preds.size()));
  for (std::size_t m = 0; m < preds.size(); ++m) {
    if (preds[m].size() != f.rows()) throw Error(kModule, "base prediction lengths differ");
    f.col(static_cast<Index>(m)) = preds[m];
  }
  return f;
}

}  // namespace

std::vector<int> assign_folds(Index n_rows, int k, std::uint64_t seed) {
  if (k < 2) throw Error(kModule, "fold count must be at least 2");
  if (n_rows < k) {
    throw Error(kModule, "need at least k = " + std::to_string(k) + " rows, got " + std::to_string(n_rows));
  }
  IndexList order(static_cast<std::size_t>(n_rows));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(derive_seed(seed, 0));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> fold(static_cast<std::size_t>(n_rows));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    fold[static_cast<std::size_t>(order[pos])] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return fold;
}

MetaFeatures oof_predictions(const Matrix& x, const Vector& y, const std::vector<learners::LearnerKind>& kinds,
                             const learners::LearnerConfigs& configs, int k, std::uint64_t seed) {
  if (x.rows() != y.size()) throw Error(kModule, "feature and label row counts differ");
  if (kinds.empty()) throw Error(kModule, "no base learners given");
  MetaFeatures mf;
  mf.kinds = kinds;
  mf.k = k;
  mf.fold = assign_folds(x.rows(), k, seed);
  mf.values = Matrix::Constant(x.rows(), static_cast<Index>(kinds.size()), std::nan(""));

  for (int f = 0; f < k; ++f) {
    IndexList train_rows;
    IndexList held_rows;
    for (Index i = 0; i < x.rows(); ++i) (mf.fold[static_cast<std::size_t>(i)] == f ? held_rows : train_rows).push_back(i);
    const Matrix xt = take_rows(x, train_rows);
    const Vector yt = take_rows(y, train_rows);
    const Matrix xh = take_rows(x, held_rows);
    const bool single_class = yt.size() == 0 || yt.minCoeff() == yt.maxCoeff();
    for (std::size_t m = 0; m < kinds.size(); ++m) {
      Vector p;
      if (kinds[m] == learners::LearnerKind::svm && single_class) {
        p = Vector::Constant(xh.rows(), yt.size() > 0 ? yt.mean() : 0.5);
        mf.base_rate_fills.emplace_back(f, static_cast<int>(m));
      } else {
        p = learners::predict(learners::train(kinds[m], xt, yt, configs), xh);
      }
      for (std::size_t r = 0; r < held_rows.size(); ++r) mf.values(held_rows[r], static_cast<Index>(m)) = p(static_cast<Index>(r));
    }
    mf.fold_training_rows.push_back(std::move(train_rows));
  }
  return mf;
}

Vector MetaModel::parameters() const {
  Vector p(coefficients.size() + 1);
  p << coefficients, intercept;
  return p;
}

void MetaModel::set_parameters(const Vector& p) {
  if (p.size() != coefficients.size() + 1) throw Error(kModule, "meta parameter count mismatch");
  coefficients = p.head(coefficients.size());
  intercept = p(p.size() - 1);
}

Vector MetaModel::raw_predict(const Matrix& features) const {
  if (features.cols() != coefficients.size()) {
    throw Error(kModule, "meta-model expects " + std::to_string(coefficients.size()) + " base predictions, got " +
                             std::to_string(features.cols()));
  }
  return (features * coefficients).array() + intercept;
}

MetaModel uniform_meta_model(Index n_models) {
  if (n_models < 1) throw Error(kModule, "meta-model needs at least one base model");
  MetaModel m;
  m.coefficients = Vector::Constant(n_models, 1.0 / static_cast<double>(n_models));
  return m;
}

MetaLoss meta_loss(const MetaModel& meta, const Matrix& features, const Vector& y) {
  if (features.rows() != y.size() || y.size() == 0) throw Error(kModule, "meta features and labels disagree in length");
  const double sum = (y - meta.raw_predict(features)).squaredNorm();
  return {sum, sum / static_cast<double>(y.size())};
}

Vector meta_loss_gradient(const MetaModel& meta, const Matrix& features, const Vector& y) {
  const Vector r = y - meta.raw_predict(features);
  Vector g(features.cols() + 1);
  g << -2.0 * (features.transpose() * r), -2.0 * r.sum();
  return g;
}

std::vector<double> windowed_means(const std::vector<double>& loss, int window) {
  if (window < 1) throw Error(kModule, "window must be at least 1");
  std::vector<double> out;
  double running = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t t = 0; t < loss.size(); ++t) {
    running += loss[t];
    if (t >= w) running -= loss[t - w];
    if (t + 1 >= w) out.push_back(running / static_cast<double>(w));
  }
  return out;
}

MetaFit meta_train(const Matrix& features, const Vector& y, const MetaConfig& config) {
  if (config.epochs < 0 || config.window < 1 || !(config.learning_rate >= 0.0)) {
    throw Error(kModule, "invalid meta-training configuration");
  }
  MetaFit fit{uniform_meta_model(features.cols()), {}};
  MetaModel& m = fit.model;
  m.adam.beta1 = config.beta1;
  m.adam.beta2 = config.beta2;
  m.adam.epsilon = config.epsilon;
  m.adam.reset(features.cols() + 1);
  m.base_learning_rate = config.learning_rate;
  m.half_life = config.half_life;

  auto& loss = fit.trace.loss;
  const auto w = static_cast<std::size_t>(config.window);
  for (int t = 0; t < config.epochs; ++t) {
    const double current = meta_loss(m, features, y).sum;
    if (!std::isfinite(current)) throw Error(kModule, "meta loss became non-finite at epoch " + std::to_string(t));
    loss.push_back(current);
    if (!fit.trace.converged && loss.size() >= 2 * w) {
      double recent = 0.0;
      double previous = 0.0;
      for (std::size_t s = 0; s < w; ++s) {
        recent += loss[loss.size() - 1 - s];
        previous += loss[loss.size() - 1 - w - s];
      }
      if (previous - recent <= config.relative_tolerance * std::abs(previous)) {
        fit.trace.converged = true;
        fit.trace.converged_epoch = t;
        if (config.stop_when_converged) break;
      }
    }
    const double eta = config.half_life > 0.0 ? config.learning_rate / (1.0 + t / config.half_life)
                                              : config.learning_rate;
    m.set_parameters(m.parameters() - m.adam.step_for(meta_loss_gradient(m, features, y), eta));
  }
  return fit;
}

Vector stack_predict(const MetaModel& meta, const std::vector<Vector>& base_predictions) {
  return meta.raw_predict(columns_of(base_predictions)).cwiseMax(0.0).cwiseMin(1.0);
}

Vector stack_predict(const MetaModel& meta, const std::vector<learners::AnyModel>& models, const Matrix& rows) {
  std::vector<Vector> preds;
  for (const auto& m : models) preds.push_back(learners::predict(m, rows));
  return stack_predict(meta, preds);
}

}  // namespace hybridml::stacking
