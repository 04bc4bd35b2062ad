#pragma once

#include "hybridml/common.hpp"

#include <cstdint>
#include <string>

namespace hybridml::features {

/// Principal directions as columns, ordered by decreasing variance. Each direction's
/// largest-magnitude entry is positive.
struct PcaTransform {
  Matrix components;
  Vector mean;
  /// Variance share of each retained component out of the total variance.
  Vector explained_ratio;

  Index retained() const noexcept { return components.cols(); }

  Matrix transform(const Matrix& x) const;
  Matrix reconstruct(const Matrix& scores) const;
};

/// Top-q eigenvectors of the sample covariance (divisor n-1). Needs 1 <= q <= cols and rows > q.
PcaTransform pca_fit(const Matrix& x, Index q);

struct MiEstimate {
  /// Nats, after clamping at 0.
  double value = 0.0;
  /// Plug-in estimate before clamping.
  double raw = 0.0;
  bool clamped = false;
  /// Histogram cells per axis actually used (category count for discrete inputs).
  int cells_a = 0;
  int cells_b = 0;
  bool discrete_a = false;
  bool discrete_b = false;
};

/// Plug-in MI from a joint histogram. An input with at most `bins` distinct values is treated as
/// categorical; otherwise it is cut into `bins` equal-width bins (bins < 2 is an error then).
/// Inputs need equal length >= 30. Exactly symmetric in (a, b).
MiEstimate mutual_information(const Vector& a, const Vector& b, int bins = 8);

/// Plug-in entropy of `a` discretized as in mutual_information. H(a) == mutual_information(a, a).
double binned_entropy(const Vector& a, int bins = 8);

enum class SetReduction {
  /// max_j MI(x_j, y)
  max_feature,
  /// mean_j MI(x_j, y)
  mean_feature,
  /// MI(first principal score of the set, y)
  first_component,
};

const char* reduction_name(SetReduction mode);
SetReduction reduction_from_name(const std::string& name);

struct SetMi {
  double value = 0.0;
  SetReduction mode = SetReduction::max_feature;
  /// Column attaining the max under max_feature; -1 otherwise.
  Index best_feature = -1;
  bool clamped = false;
};

SetMi feature_set_mi(const Matrix& features, const Vector& y, int bins, SetReduction mode);

struct GainReport {
  double i_original = 0.0;
  double i_extracted = 0.0;
  /// i_extracted - i_original.
  double delta = 0.0;
  /// NaN until a permutation test fills it.
  double p_value = 0.0;
  bool significant = false;
  int permutations = 0;
  std::string original_mode;
  std::string extracted_mode;
  bool clamped = false;
};

struct GainConfig {
  Index q = 2;
  int bins = 8;
  SetReduction original_mode = SetReduction::max_feature;
  SetReduction extracted_mode = SetReduction::first_component;
};

/// I(PCA_q(X); y) - I(X; y), each side reduced by its configured mode. p_value is NaN.
GainReport information_gain(const Matrix& x, const Vector& y, const GainConfig& config);

/// Permutes y B times (B >= 99); p = (1 + #{dI_b >= dI_obs}) / (B + 1); significant iff p < 0.05.
GainReport permutation_test(const Matrix& x, const Vector& y, const GainConfig& config, int permutations,
                            std::uint64_t seed);

/// As permutation_test, with the extracted variable replaced by a model's scores on the same rows.
GainReport score_permutation_test(const Matrix& x, const Vector& scores, const Vector& y, const GainConfig& config,
                                  int permutations, std::uint64_t seed);

}  // namespace hybridml::features
