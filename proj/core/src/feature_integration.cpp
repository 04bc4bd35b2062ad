#include "hybridml/feature_integration.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

namespace hybridml::features {

namespace {

constexpr const char* kModule = "feature_integration";

struct Coded {
  std::vector<int> code;
  int cells = 0;
  bool discrete = false;
};

Coded discretize(const Vector& v, int bins) {
  Coded out;
  out.code.resize(static_cast<std::size_t>(v.size()));
  std::map<double, int> levels;
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v(i))) throw Error(kModule, "mutual information input is not finite");
    levels.emplace(v(i), 0);
    if (static_cast<int>(levels.size()) > bins) break;
  }
  if (static_cast<int>(levels.size()) <= bins) {
    int next = 0;
    for (auto& [value, id] : levels) id = next++;
    for (Index i = 0; i < v.size(); ++i) out.code[static_cast<std::size_t>(i)] = levels.at(v(i));
    out.cells = next;
    out.discrete = true;
    return out;
  }
  if (bins < 2) throw Error(kModule, "continuous input needs at least 2 bins");
  const double lo = v.minCoeff();
  const double width = (v.maxCoeff() - lo) / bins;
  for (Index i = 0; i < v.size(); ++i) {
    const int b = static_cast<int>(std::floor((v(i) - lo) / width));
    out.code[static_cast<std::size_t>(i)] = std::clamp(b, 0, bins - 1);
  }
  out.cells = bins;
  return out;
}

// Sum in ascending order so that any permutation of the same terms gives identical bits.
double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

MiEstimate mi_from_codes(const Coded& a, const Coded& b) {
  const auto n = static_cast<double>(a.code.size());
  std::vector<long long> joint(static_cast<std::size_t>(a.cells) * static_cast<std::size_t>(b.cells), 0);
  std::vector<long long> ca(static_cast<std::size_t>(a.cells), 0);
  std::vector<long long> cb(static_cast<std::size_t>(b.cells), 0);
  for (std::size_t i = 0; i < a.code.size(); ++i) {
    const auto ia = static_cast<std::size_t>(a.code[i]);
    const auto ib = static_cast<std::size_t>(b.code[i]);
    ++joint[ia * static_cast<std::size_t>(b.cells) + ib];
    ++ca[ia];
    ++cb[ib];
  }
  std::vector<double> terms;
  for (std::size_t ia = 0; ia < ca.size(); ++ia) {
    for (std::size_t ib = 0; ib < cb.size(); ++ib) {
      const auto c = static_cast<double>(joint[ia * cb.size() + ib]);
      if (c == 0.0) continue;
      const double marg = static_cast<double>(ca[ia]) * static_cast<double>(cb[ib]);
      terms.push_back(c / n * std::log(c * n / marg));
    }
  }
  MiEstimate est;
  est.raw = sorted_sum(std::move(terms));
  est.clamped = est.raw < 0.0;
  est.value = std::max(est.raw, 0.0);
  est.cells_a = a.cells;
  est.cells_b = b.cells;
  est.discrete_a = a.discrete;
  est.discrete_b = b.discrete;
  return est;
}

void require_mi_inputs(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw Error(kModule, "mutual information inputs differ in length");
  if (a.size() < 30) throw Error(kModule, "mutual information needs at least 30 samples");
}

// MI side computations that depend on y, for use under permutation.
using GainFn = std::function<GainReport(const Vector&)>;

GainReport run_permutations(const GainFn& gain, const Vector& y, int permutations, std::uint64_t seed) {
  if (permutations < 99) throw Error(kModule, "permutation test needs B >= 99");
  GainReport report = gain(y);
  int at_least = 0;
  std::vector<Index> order(static_cast<std::size_t>(y.size()));
  for (int b = 0; b < permutations; ++b) {
    std::iota(order.begin(), order.end(), Index{0});
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(b)));
    std::shuffle(order.begin(), order.end(), rng);
    const GainReport permuted = gain(take_rows(y, order));
    if (permuted.delta >= report.delta) ++at_least;
  }
  report.permutations = permutations;
  report.p_value = (1.0 + at_least) / (permutations + 1.0);
  report.significant = report.p_value < 0.05;
  return report;
}

}  // namespace

Matrix PcaTransform::transform(const Matrix& x) const {
  if (x.cols() != mean.size()) throw Error(kModule, "PCA input has the wrong number of columns");
  return (x.rowwise() - mean.transpose()) * components;
}

Matrix PcaTransform::reconstruct(const Matrix& scores) const {
  if (scores.cols() != components.cols()) throw Error(kModule, "score matrix has the wrong number of columns");
  return (scores * components.transpose()).rowwise() + mean.transpose();
}

PcaTransform pca_fit(const Matrix& x, Index q) {
  if (q < 1 || q > x.cols()) {
    throw Error(kModule, "retained components q = " + std::to_string(q) + " outside [1, " + std::to_string(x.cols()) +
                             "]");
  }
  if (x.rows() <= q) throw Error(kModule, "PCA needs more rows than retained components");
  PcaTransform pca;
  pca.mean = x.colwise().mean().transpose();
  const Matrix centered = x.rowwise() - pca.mean.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(kModule, "covariance eigendecomposition failed");

  const Index d = x.cols();
  const Vector values = eig.eigenvalues().cwiseMax(0.0);
  const double total = values.sum();
  pca.components.resize(d, q);
  pca.explained_ratio.resize(q);
  for (Index k = 0; k < q; ++k) {
    Vector dir = eig.eigenvectors().col(d - 1 - k);
    Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0) dir = -dir;
    pca.components.col(k) = dir;
    pca.explained_ratio(k) = total > 0.0 ? values(d - 1 - k) / total : 0.0;
  }
  return pca;
}

MiEstimate mutual_information(const Vector& a, const Vector& b, int bins) {
  require_mi_inputs(a, b);
  return mi_from_codes(discretize(a, bins), discretize(b, bins));
}

double binned_entropy(const Vector& a, int bins) {
  require_mi_inputs(a, a);
  const Coded c = discretize(a, bins);
  std::vector<long long> counts(static_cast<std::size_t>(c.cells), 0);
  for (int code : c.code) ++counts[static_cast<std::size_t>(code)];
  const auto n = static_cast<double>(a.size());
  std::vector<double> terms;
  for (long long k : counts) {
    if (k == 0) continue;
    const auto ck = static_cast<double>(k);
    terms.push_back(ck / n * std::log(ck * n / (ck * ck)));
  }
  return sorted_sum(std::move(terms));
}

const char* reduction_name(SetReduction mode) {
  switch (mode) {
    case SetReduction::max_feature: return "max_feature";
    case SetReduction::mean_feature: return "mean_feature";
    case SetReduction::first_component: return "first_component";
  }
  throw Error(kModule, "unknown set reduction");
}

SetReduction reduction_from_name(const std::string& name) {
  for (auto m : {SetReduction::max_feature, SetReduction::mean_feature, SetReduction::first_component}) {
    if (name == reduction_name(m)) return m;
  }
  throw Error(kModule, "unknown set reduction '" + name + "' (valid: max_feature, mean_feature, first_component)");
}

SetMi feature_set_mi(const Matrix& features, const Vector& y, int bins, SetReduction mode) {
  if (features.rows() != y.size() || features.cols() < 1) throw Error(kModule, "feature set and target disagree");
  SetMi out;
  out.mode = mode;
  if (mode == SetReduction::first_component) {
    const Vector score = pca_fit(features, 1).transform(features).col(0);
    const MiEstimate e = mutual_information(score, y, bins);
    out.value = e.value;
    out.clamped = e.clamped;
    return out;
  }
  double best = -1.0;
  double total = 0.0;
  for (Index j = 0; j < features.cols(); ++j) {
    const MiEstimate e = mutual_information(features.col(j), y, bins);
    out.clamped = out.clamped || e.clamped;
    total += e.value;
    if (e.value > best) {
      best = e.value;
      out.best_feature = j;
    }
  }
  if (mode == SetReduction::max_feature) {
    out.value = best;
  } else {
    out.value = total / static_cast<double>(features.cols());
    out.best_feature = -1;
  }
  return out;
}

GainReport information_gain(const Matrix& x, const Vector& y, const GainConfig& config) {
  const Matrix extracted = pca_fit(x, config.q).transform(x);
  const SetMi orig = feature_set_mi(x, y, config.bins, config.original_mode);
  const SetMi ext = feature_set_mi(extracted, y, config.bins, config.extracted_mode);
  GainReport r;
  r.i_original = orig.value;
  r.i_extracted = ext.value;
  r.delta = ext.value - orig.value;
  r.p_value = std::numeric_limits<double>::quiet_NaN();
  r.original_mode = reduction_name(config.original_mode);
  r.extracted_mode = std::string("pca") + std::to_string(config.q) + ":" + reduction_name(config.extracted_mode);
  r.clamped = orig.clamped || ext.clamped;
  return r;
}

GainReport permutation_test(const Matrix& x, const Vector& y, const GainConfig& config, int permutations,
                            std::uint64_t seed) {
  const Matrix extracted = pca_fit(x, config.q).transform(x);
  const std::string ext_label = std::string("pca") + std::to_string(config.q) + ":" + reduction_name(config.extracted_mode);
  const GainFn gain = [&](const Vector& target) {
    const SetMi orig = feature_set_mi(x, target, config.bins, config.original_mode);
    const SetMi ext = feature_set_mi(extracted, target, config.bins, config.extracted_mode);
    GainReport r;
    r.i_original = orig.value;
    r.i_extracted = ext.value;
    r.delta = ext.value - orig.value;
    r.original_mode = reduction_name(config.original_mode);
    r.extracted_mode = ext_label;
    r.clamped = orig.clamped || ext.clamped;
    return r;
  };
  return run_permutations(gain, y, permutations, seed);
}

GainReport score_permutation_test(const Matrix& x, const Vector& scores, const Vector& y, const GainConfig& config,
                                  int permutations, std::uint64_t seed) {
  if (scores.size() != y.size()) throw Error(kModule, "model scores and target differ in length");
  const GainFn gain = [&](const Vector& target) {
    const SetMi orig = feature_set_mi(x, target, config.bins, config.original_mode);
    const MiEstimate ext = mutual_information(scores, target, config.bins);
    GainReport r;
    r.i_original = orig.value;
    r.i_extracted = ext.value;
    r.delta = ext.value - orig.value;
    r.original_mode = reduction_name(config.original_mode);
    r.extracted_mode = "model_score";
    r.clamped = orig.clamped || ext.clamped;
    return r;
  };
  return run_permutations(gain, y, permutations, seed);
}

}  // namespace hybridml::features
