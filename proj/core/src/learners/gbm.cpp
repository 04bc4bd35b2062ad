#include "hybridml/learners/gbm.hpp"

#include "../model_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridml::learners {

namespace {

constexpr const char* kModule = "learners";

struct LossPieces {
  double value = 0.0;
  double slope = 0.0;
  double curvature = 0.0;
};

// Summed logistic loss along F + a h, with first and second derivative in a.
LossPieces along(const Vector& f, const Vector& h, const Vector& y, double a) {
  LossPieces p;
  for (Index i = 0; i < f.size(); ++i) {
    const double z = f(i) + a * h(i);
    const double s = sigmoid(z);
    p.value += softplus(z) - y(i) * z;
    p.slope += (s - y(i)) * h(i);
    p.curvature += s * (1.0 - s) * h(i) * h(i);
  }
  return p;
}

int grow(RegressionTree& tree, const Matrix& x, const Vector& target, IndexList rows, int depth, int max_depth,
         std::size_t min_leaf) {
  const auto id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const auto n = static_cast<double>(rows.size());
  double sum = 0.0;
  for (Index i : rows) sum += target(i);
  tree.nodes[static_cast<std::size_t>(id)].value = sum / n;
  if (depth >= max_depth || rows.size() < 2 * min_leaf) return id;

  // Maximizing sum_l^2/n_l + sum_r^2/n_r is equivalent to minimizing child SSE.
  const double parent_score = sum * sum / n;
  double best_gain = 1e-12 * std::max(1.0, std::abs(parent_score));
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<std::pair<double, double>> column(rows.size());
  for (Index f = 0; f < x.cols(); ++f) {
    for (std::size_t k = 0; k < rows.size(); ++k) column[k] = {x(rows[k], f), target(rows[k])};
    std::sort(column.begin(), column.end());
    double left = 0.0;
    for (std::size_t k = 1; k < column.size(); ++k) {
      left += column[k - 1].second;
      if (k < min_leaf || column.size() - k < min_leaf) continue;
      if (!(column[k - 1].first < column[k].first)) continue;
      const auto nl = static_cast<double>(k);
      const double right = sum - left;
      const double gain = left * left / nl + right * right / (n - nl) - parent_score;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        const double lo = column[k - 1].first;
        const double hi = column[k].first;
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr < hi)) thr = lo;
        best_threshold = thr;
      }
    }
  }
  if (best_feature < 0) return id;
  IndexList l;
  IndexList r;
  for (Index i : rows) (x(i, best_feature) <= best_threshold ? l : r).push_back(i);
  rows.clear();
  const int li = grow(tree, x, target, std::move(l), depth + 1, max_depth, min_leaf);
  const int ri = grow(tree, x, target, std::move(r), depth + 1, max_depth, min_leaf);
  auto& node = tree.nodes[static_cast<std::size_t>(id)];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = li;
  node.right = ri;
  return id;
}

}  // namespace

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    id = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(id)].value;
}

Vector RegressionTree::predict(const Matrix& rows) const {
  Vector out(rows.rows());
  for (Index i = 0; i < rows.rows(); ++i) out(i) = predict_row(rows.row(i));
  return out;
}

RegressionTree fit_regression_tree(const Matrix& x, const Vector& target, const IndexList& rows, int max_depth,
                                   int min_leaf) {
  if (rows.empty()) throw Error(kModule, "regression tree needs at least one row");
  RegressionTree tree;
  grow(tree, x, target, rows, 0, max_depth, static_cast<std::size_t>(std::max(min_leaf, 1)));
  return tree;
}

Vector GbmModel::decision(const Matrix& rows) const {
  if (rows.cols() != n_features) {
    throw Error(kModule, "boosting model expects " + std::to_string(n_features) + " features, got " +
                             std::to_string(rows.cols()));
  }
  Vector f = Vector::Constant(rows.rows(), initial_score);
  for (const auto& stage : stages) f += shrinkage * stage.step * stage.tree.predict(rows);
  return f;
}

Vector GbmModel::predict_proba(const Matrix& rows) const {
  return decision(rows).unaryExpr([](double z) { return sigmoid(z); });
}

void GbmModel::save(std::ostream& out) const {
  model_io::Writer w(out);
  w.field("n_features", static_cast<long long>(n_features))
      .field("initial_score", initial_score)
      .field("shrinkage", shrinkage)
      .field("skipped_stages", static_cast<long long>(skipped_stages))
      .field("stages", static_cast<long long>(stages.size()));
  for (const auto& s : stages) {
    w.field("step", s.step)
        .field("wolfe", static_cast<long long>(s.wolfe_curvature))
        .field("tree_nodes", static_cast<long long>(s.tree.nodes.size()));
    for (const auto& n : s.tree.nodes) {
      out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << format_double(n.value) << '\n';
    }
  }
}

GbmModel GbmModel::load(std::istream& in) {
  model_io::Reader r(in);
  GbmModel m;
  m.n_features = static_cast<Index>(r.integer("n_features"));
  m.initial_score = r.real("initial_score");
  m.shrinkage = r.real("shrinkage");
  m.skipped_stages = static_cast<int>(r.integer("skipped_stages"));
  const auto count = r.integer("stages");
  for (long long s = 0; s < count; ++s) {
    GbmStage stage;
    stage.step = r.real("step");
    stage.wolfe_curvature = r.integer("wolfe") != 0;
    const auto nodes = r.integer("tree_nodes");
    for (long long k = 0; k < nodes; ++k) {
      RegressionNode n;
      n.feature = std::stoi(r.word("node"));
      in >> n.threshold >> n.left >> n.right >> n.value;
      if (!in) throw Error(kModule, "truncated boosting tree node");
      stage.tree.nodes.push_back(n);
    }
    m.stages.push_back(std::move(stage));
  }
  return m;
}

double logistic_loss(const Vector& scores, const Vector& y) {
  if (scores.size() != y.size() || y.size() == 0) throw Error(kModule, "logistic loss shape mismatch");
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) total += softplus(scores(i)) - y(i) * scores(i);
  return total / static_cast<double>(y.size());
}

LineSearchResult armijo_wolfe_search(const Vector& scores, const Vector& direction, const Vector& y, double c1,
                                     double c2, int max_backtracks) {
  LineSearchResult res;
  const LossPieces at0 = along(scores, direction, y, 0.0);
  if (!(at0.slope < 0.0)) return res;  // not a descent direction

  double step = at0.curvature > 0.0 ? -at0.slope / at0.curvature : 1.0;
  if (!std::isfinite(step) || step <= 0.0) step = 1.0;
  auto armijo = [&](double a, const LossPieces& p) { return p.value <= at0.value + c1 * a * at0.slope; };

  LossPieces at = along(scores, direction, y, step);
  while (!armijo(step, at)) {
    if (res.backtracks == max_backtracks) return res;
    ++res.backtracks;
    step *= 0.5;
    at = along(scores, direction, y, step);
  }
  // Short-side curvature failure: extend while sufficient decrease still holds.
  for (int grow = 0; grow < 20 && at.slope < -c2 * std::abs(at0.slope); ++grow) {
    const LossPieces longer = along(scores, direction, y, 2.0 * step);
    if (!armijo(2.0 * step, longer)) break;
    step *= 2.0;
    at = longer;
  }
  res.step = step;
  res.armijo = true;
  res.wolfe_curvature = std::abs(at.slope) <= c2 * std::abs(at0.slope);
  return res;
}

GbmModel gb_train(const Matrix& x, const Vector& y, const GbmConfig& config) {
  if (x.rows() != y.size() || x.rows() == 0) throw Error(kModule, "boosting training data shape mismatch");
  if (config.iterations < 0 || config.max_depth < 1 || !(config.shrinkage > 0.0 && config.shrinkage <= 1.0)) {
    throw Error(kModule, "invalid boosting configuration");
  }
  if (!(config.subsample > 0.0 && config.subsample <= 1.0)) throw Error(kModule, "subsample must lie in (0, 1]");

  GbmModel m;
  m.n_features = x.cols();
  m.shrinkage = config.shrinkage;
  const double base_rate = std::clamp(y.mean(), 1e-6, 1.0 - 1e-6);
  m.initial_score = std::log(base_rate / (1.0 - base_rate));

  const Index n = x.rows();
  Vector scores = Vector::Constant(n, m.initial_score);
  m.loss_trace.push_back(logistic_loss(scores, y));
  IndexList all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  Rng rng(derive_seed(config.seed, 11));
  const auto sub_n = std::max<Index>(1, static_cast<Index>(std::floor(config.subsample * static_cast<double>(n))));

  for (int stage = 0; stage < config.iterations; ++stage) {
    // Negative gradient of the logistic loss at the current scores.
    const Vector residual = y - scores.unaryExpr([](double z) { return sigmoid(z); });
    IndexList rows = all;
    if (sub_n < n) {
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(static_cast<std::size_t>(sub_n));
      std::sort(rows.begin(), rows.end());
    }
    RegressionTree tree = fit_regression_tree(x, residual, rows, config.max_depth, config.min_leaf);
    const Vector h = tree.predict(x);
    const LineSearchResult ls =
        armijo_wolfe_search(scores, h, y, config.armijo_c1, config.wolfe_c2, config.max_backtracks);
    if (!ls.armijo) {
      ++m.skipped_stages;
      continue;
    }
    scores += config.shrinkage * ls.step * h;
    m.loss_trace.push_back(logistic_loss(scores, y));
    m.stages.push_back({std::move(tree), ls.step, ls.wolfe_curvature});
  }
  return m;
}

}  // namespace hybridml::learners
