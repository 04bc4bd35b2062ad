#include "hybridml/learners/forest.hpp"

#include "../model_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridml::learners {

namespace {

constexpr const char* kModule = "learners";

double binary_gini(double n1, double n) {
  const double p = n1 / n;
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, const Vector& y, const ForestConfig& config, int m_try, Rng& rng)
      : x_(x), y_(y), config_(config), m_try_(m_try), rng_(rng) {}

  DecisionTree build(IndexList samples) {
    root_size_ = static_cast<double>(samples.size());
    DecisionTree tree;
    grow(tree, samples, 0);
    return tree;
  }

 private:
  int grow(DecisionTree& tree, IndexList& samples, int depth) {
    const auto node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto n = static_cast<double>(samples.size());
    double n1 = 0.0;
    for (Index i : samples) n1 += y_(i);
    tree.nodes[node_id].prob1 = n1 / n;
    tree.nodes[node_id].n_samples = static_cast<Index>(samples.size());

    const auto min_leaf = static_cast<std::size_t>(std::max(config_.min_leaf, 1));
    if (depth >= config_.max_depth || samples.size() < 2 * min_leaf || n1 == 0.0 || n1 == n) return node_id;

    const double parent = binary_gini(n1, n);
    double best_decrease = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, double>> column(samples.size());
    for (int f : candidate_features()) {
      for (std::size_t k = 0; k < samples.size(); ++k) column[k] = {x_(samples[k], f), y_(samples[k])};
      std::sort(column.begin(), column.end());
      double left1 = 0.0;
      for (std::size_t k = 1; k < column.size(); ++k) {
        left1 += column[k - 1].second;
        if (k < min_leaf || column.size() - k < min_leaf) continue;
        if (!(column[k - 1].first < column[k].first)) continue;
        const auto nl = static_cast<double>(k);
        const double nr = n - nl;
        const double child = nl / n * binary_gini(left1, nl) + nr / n * binary_gini(n1 - left1, nr);
        const double decrease = parent - child;
        if (decrease > best_decrease) {
          best_decrease = decrease;
          best_feature = f;
          const double lo = column[k - 1].first;
          const double hi = column[k].first;
          double thr = lo + (hi - lo) / 2.0;
          if (!(thr < hi)) thr = lo;
          best_threshold = thr;
        }
      }
    }
    if (best_feature < 0) return node_id;

    IndexList left;
    IndexList right;
    for (Index i : samples) (x_(i, best_feature) <= best_threshold ? left : right).push_back(i);
    samples.clear();
    samples.shrink_to_fit();

    const int l = grow(tree, left, depth + 1);
    const int r = grow(tree, right, depth + 1);
    TreeNode& node = tree.nodes[node_id];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = r;
    node.weighted_gini_decrease = n / root_size_ * best_decrease;
    return node_id;
  }

  std::vector<int> candidate_features() {
    std::vector<int> all(static_cast<std::size_t>(x_.cols()));
    std::iota(all.begin(), all.end(), 0);
    for (int i = 0; i < m_try_; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(all.size()) - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(pick(rng_))]);
    }
    all.resize(static_cast<std::size_t>(m_try_));
    return all;
  }

  const Matrix& x_;
  const Vector& y_;
  const ForestConfig& config_;
  int m_try_;
  Rng& rng_;
  double root_size_ = 1.0;
};

}  // namespace

double DecisionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int id = 0;
  while (!nodes[static_cast<std::size_t>(id)].is_leaf()) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    id = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(id)].prob1;
}

Matrix ForestModel::tree_predictions(const Matrix& rows) const {
  if (rows.cols() != n_features) {
    throw Error(kModule, "forest expects " + std::to_string(n_features) + " features, got " +
                             std::to_string(rows.cols()));
  }
  Matrix out(rows.rows(), static_cast<Index>(trees.size()));
  for (std::size_t t = 0; t < trees.size(); ++t) {
    for (Index i = 0; i < rows.rows(); ++i) out(i, static_cast<Index>(t)) = trees[t].predict_row(rows.row(i));
  }
  return out;
}

Vector ForestModel::predict_proba(const Matrix& rows) const { return tree_predictions(rows).rowwise().mean(); }

void ForestModel::save(std::ostream& out) const {
  model_io::Writer w(out);
  w.field("n_features", static_cast<long long>(n_features))
      .field("n_trees", static_cast<long long>(config.n_trees))
      .field("max_depth", static_cast<long long>(config.max_depth))
      .field("m_try", static_cast<long long>(config.m_try))
      .field("min_leaf", static_cast<long long>(config.min_leaf))
      .field("seed", std::to_string(config.seed));
  for (const auto& tree : trees) {
    w.field("tree_nodes", static_cast<long long>(tree.nodes.size()));
    for (const auto& n : tree.nodes) {
      out << "node " << n.feature << ' ' << format_double(n.threshold) << ' ' << n.left << ' ' << n.right << ' '
          << format_double(n.prob1) << ' ' << n.n_samples << ' ' << format_double(n.weighted_gini_decrease) << '\n';
    }
  }
}

ForestModel ForestModel::load(std::istream& in) {
  model_io::Reader r(in);
  ForestModel f;
  f.n_features = static_cast<Index>(r.integer("n_features"));
  f.config.n_trees = static_cast<int>(r.integer("n_trees"));
  f.config.max_depth = static_cast<int>(r.integer("max_depth"));
  f.config.m_try = static_cast<int>(r.integer("m_try"));
  f.config.min_leaf = static_cast<int>(r.integer("min_leaf"));
  f.config.seed = std::stoull(r.word("seed"));
  for (int t = 0; t < f.config.n_trees; ++t) {
    DecisionTree tree;
    const auto count = r.integer("tree_nodes");
    for (long long k = 0; k < count; ++k) {
      TreeNode n;
      n.feature = static_cast<int>(std::stoi(r.word("node")));
      in >> n.threshold >> n.left >> n.right >> n.prob1 >> n.n_samples >> n.weighted_gini_decrease;
      if (!in) throw Error(kModule, "truncated forest node");
      tree.nodes.push_back(n);
    }
    f.trees.push_back(std::move(tree));
  }
  return f;
}

double gini_impurity(std::span<const double> class_counts) {
  double total = 0.0;
  for (double c : class_counts) {
    if (c < 0) throw Error(kModule, "class counts must be nonnegative");
    total += c;
  }
  if (total <= 0) throw Error(kModule, "Gini impurity of an empty node");
  double sum_sq = 0.0;
  for (double c : class_counts) sum_sq += (c / total) * (c / total);
  return 1.0 - sum_sq;
}

ForestModel rf_train(const Matrix& x, const Vector& y, const ForestConfig& config) {
  if (x.rows() != y.size() || x.rows() == 0) throw Error(kModule, "forest training data shape mismatch");
  if (config.n_trees < 1) throw Error(kModule, "forest needs n_trees >= 1");
  if (config.max_depth < 0) throw Error(kModule, "forest max_depth must be >= 0");
  const int m_try = config.m_try == 0 ? std::max(1, static_cast<int>(std::floor(std::sqrt(double(x.cols())))))
                                      : config.m_try;
  if (m_try < 1 || m_try > x.cols()) throw Error(kModule, "m_try must lie in [1, n_cols]");

  ForestModel f;
  f.n_features = x.cols();
  f.config = config;
  const Index n = x.rows();
  for (int t = 0; t < config.n_trees; ++t) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
    std::uniform_int_distribution<Index> draw(0, n - 1);
    IndexList bootstrap(static_cast<std::size_t>(n));
    for (auto& i : bootstrap) i = draw(rng);
    TreeBuilder builder(x, y, config, m_try, rng);
    f.trees.push_back(builder.build(std::move(bootstrap)));
  }
  return f;
}

FeatureImportance normalize_importance(const Vector& mean_decrease) {
  FeatureImportance fi;
  fi.mean_decrease = mean_decrease;
  const double total = mean_decrease.sum();
  if (mean_decrease.size() == 0) throw Error(kModule, "importance of zero features");
  if (total <= 0.0) {
    fi.importance = Vector::Constant(mean_decrease.size(), 1.0 / static_cast<double>(mean_decrease.size()));
    fi.uniform_fallback = true;
  } else {
    fi.importance = mean_decrease / total;
  }
  return fi;
}

FeatureImportance rf_feature_importance(const ForestModel& forest) {
  Vector total = Vector::Zero(forest.n_features);
  for (const auto& tree : forest.trees) {
    for (const auto& node : tree.nodes) {
      if (!node.is_leaf()) total(node.feature) += node.weighted_gini_decrease;
    }
  }
  return normalize_importance(total / static_cast<double>(std::max<std::size_t>(forest.trees.size(), 1)));
}

double rf_error_bound(double rho, double s) {
  if (!(rho >= 0.0 && rho <= 1.0) || !(s >= 0.0 && s <= 1.0)) {
    throw Error(kModule, "rf_error_bound arguments must lie in [0, 1]");
  }
  return rho * (1.0 - s) + (1.0 - rho) * s;
}

ForestDiagnostics forest_diagnostics(const ForestModel& forest, const Matrix& x, const Vector& y) {
  const Matrix per_tree = forest.tree_predictions(x);
  ForestDiagnostics d;
  const Index t = per_tree.cols();
  double acc = 0.0;
  for (Index j = 0; j < t; ++j) acc += 1.0 - misclassification_rate(per_tree.col(j), y);
  d.strength = acc / static_cast<double>(t) - 0.5;
  double corr = 0.0;
  Index pairs = 0;
  for (Index a = 0; a < t; ++a) {
    for (Index b = a + 1; b < t; ++b) {
      corr += pearson(per_tree.col(a), per_tree.col(b));
      ++pairs;
    }
  }
  d.tree_correlation = pairs ? corr / static_cast<double>(pairs) : 1.0;
  d.error_bound = rf_error_bound(std::clamp(d.tree_correlation, 0.0, 1.0), std::clamp(d.strength, 0.0, 1.0));
  d.forest_error = misclassification_rate(forest.predict_proba(x), y);
  return d;
}

}  // namespace hybridml::learners
