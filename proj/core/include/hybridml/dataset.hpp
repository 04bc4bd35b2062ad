#pragma once

#include "hybridml/common.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hybridml::data {

/// Binary-labelled feature table. Immutable once constructed.
class Dataset {
 public:
  Dataset() = default;

  /// Validates shape and label invariants; throws Error("dataset", ...) on violation.
  Dataset(Matrix features, Vector target, std::vector<std::string> feature_names,
          std::size_t imputed_rows = 0);

  const Matrix& features() const noexcept { return features_; }
  const Vector& target() const noexcept { return target_; }
  const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
  Index n_rows() const noexcept { return features_.rows(); }
  Index n_cols() const noexcept { return features_.cols(); }

  /// Column index for `name`; throws if absent.
  Index column(const std::string& name) const;

  /// Sub-dataset with the given rows (in order).
  Dataset subset(const IndexList& rows) const;

  /// Rows whose missing values were imputed at ingestion.
  std::size_t imputed_rows() const noexcept { return imputed_rows_; }

 private:
  Matrix features_;
  Vector target_;
  std::vector<std::string> feature_names_;
  std::size_t imputed_rows_ = 0;
};

enum class MissingPolicy { median, drop };

/// The 13 attribute names of the processed Cleveland file, in file order.
const std::vector<std::string>& cleveland_feature_names();

/// Parse the 14-field UCI `processed.cleveland.data` layout ("?" marks missing values).
/// `num` > 0 maps to label 1. Missing features are replaced by the column median over
/// non-missing entries (or the row is dropped under MissingPolicy::drop).
Dataset load_cleveland(const std::filesystem::path& path, MissingPolicy policy = MissingPolicy::median);
Dataset parse_cleveland(std::istream& in, MissingPolicy policy = MissingPolicy::median);

/// Per-column affine transform x -> (x - mean) / std with population std.
struct Standardizer {
  Vector mean;
  Vector std;
  /// True for columns with zero variance; those are centered but not scaled.
  std::vector<bool> constant;

  Matrix apply(const Matrix& raw) const;
  Matrix inverse(const Matrix& standardized) const;

  void save(std::ostream& out) const;
  static Standardizer load(std::istream& in);
};

struct Standardized {
  Dataset data;
  Standardizer transform;
};

Standardizer fit_standardizer(const Matrix& features);
Standardized standardize(const Dataset& d);

struct SplitSpec {
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  std::uint64_t seed = 42;

  void validate() const;
};

struct Split {
  IndexList train;
  IndexList val;
  IndexList test;

  void save(std::ostream& out) const;
  static Split load(std::istream& in);
};

/// Seeded partition of row indices. Validation and test sizes are floor(fraction * n);
/// the remainder goes to training.
Split split(const Dataset& d, const SplitSpec& spec);
Split split(Index n_rows, const SplitSpec& spec);

struct Histogram {
  std::vector<double> edges;  // bins + 1 entries
  std::vector<std::size_t> counts;
};

/// Equal-width histogram of a column; the last bin is closed on the right.
Histogram histogram(const Vector& values, int bins);

/// Histogram of the `chol` column of a raw Cleveland dataset.
Histogram chol_histogram(const Dataset& d, int bins);

}  // namespace hybridml::data
