#include "hybridml/dataset.hpp"

#include "kv_text.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <sstream>

namespace hybridml::data {

namespace {

constexpr const char* kModule = "dataset";
constexpr int kClevelandFields = 14;

std::optional<double> parse_field(const std::string& raw, int line_no, int field) {
  std::string tok = raw;
  tok.erase(0, tok.find_first_not_of(" \t\r"));
  tok.erase(tok.find_last_not_of(" \t\r") + 1);
  if (tok == "?") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(kModule, "line " + std::to_string(line_no) + ", field " + std::to_string(field + 1) +
                             ": non-numeric token '" + tok + "'");
  }
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

Dataset::Dataset(Matrix features, Vector target, std::vector<std::string> feature_names,
                 std::size_t imputed_rows)
    : features_(std::move(features)),
      target_(std::move(target)),
      feature_names_(std::move(feature_names)),
      imputed_rows_(imputed_rows) {
  if (target_.size() != features_.rows()) throw Error(kModule, "target length differs from row count");
  if (static_cast<Index>(feature_names_.size()) != features_.cols()) {
    throw Error(kModule, "feature_names length differs from column count");
  }
  for (Index i = 0; i < target_.size(); ++i) {
    if (target_(i) != 0.0 && target_(i) != 1.0) throw Error(kModule, "labels must be 0 or 1");
  }
  if (!features_.allFinite()) throw Error(kModule, "features contain missing or non-finite entries");
}

Index Dataset::column(const std::string& name) const {
  const auto it = std::find(feature_names_.begin(), feature_names_.end(), name);
  if (it == feature_names_.end()) throw Error(kModule, "no column named '" + name + "'");
  return static_cast<Index>(it - feature_names_.begin());
}

Dataset Dataset::subset(const IndexList& rows) const {
  return Dataset(take_rows(features_, rows), take_rows(target_, rows), feature_names_);
}

const std::vector<std::string>& cleveland_feature_names() {
  static const std::vector<std::string> names = {"age",     "sex",     "cp",    "trestbps", "chol",
                                                 "fbs",     "restecg", "thalach", "exang",  "oldpeak",
                                                 "slope",   "ca",      "thal"};
  return names;
}

Dataset parse_cleveland(std::istream& in, MissingPolicy policy) {
  constexpr int n_features = kClevelandFields - 1;
  std::vector<std::vector<std::optional<double>>> rows;
  std::vector<double> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    if (static_cast<int>(fields.size()) != kClevelandFields) {
      throw Error(kModule, "line " + std::to_string(line_no) + ": expected 14 fields, found " +
                               std::to_string(fields.size()));
    }
    std::vector<std::optional<double>> row;
    for (int c = 0; c < n_features; ++c) row.push_back(parse_field(fields[c], line_no, c));
    const auto num = parse_field(fields[n_features], line_no, n_features);
    if (!num) throw Error(kModule, "line " + std::to_string(line_no) + ": missing diagnosis field");
    labels.push_back(*num > 0.0 ? 1.0 : 0.0);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(kModule, "empty input: no data rows");

  std::vector<double> medians(n_features, 0.0);
  for (int c = 0; c < n_features; ++c) {
    std::vector<double> present;
    for (const auto& r : rows) {
      if (r[c]) present.push_back(*r[c]);
    }
    if (!present.empty()) medians[c] = median_of(std::move(present));
  }

  std::vector<std::size_t> keep;
  std::size_t imputed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool incomplete = std::any_of(rows[i].begin(), rows[i].end(), [](const auto& v) { return !v; });
    if (incomplete) {
      if (policy == MissingPolicy::drop) continue;
      ++imputed;
    }
    keep.push_back(i);
  }
  if (keep.empty()) throw Error(kModule, "no complete rows remain after dropping missing values");
  for (int c = 0; c < n_features; ++c) {
    const bool column_missing = std::all_of(rows.begin(), rows.end(), [c](const auto& r) { return !r[c]; });
    if (column_missing && policy == MissingPolicy::median) {
      throw Error(kModule, "column " + cleveland_feature_names()[c] + " has no observed values");
    }
  }

  Matrix x(static_cast<Index>(keep.size()), n_features);
  Vector y(static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto& r = rows[keep[k]];
    for (int c = 0; c < n_features; ++c) x(static_cast<Index>(k), c) = r[c] ? *r[c] : medians[c];
    y(static_cast<Index>(k)) = labels[keep[k]];
  }
  return Dataset(std::move(x), std::move(y), cleveland_feature_names(), imputed);
}

Dataset load_cleveland(const std::filesystem::path& path, MissingPolicy policy) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open '" + path.string() + "'");
  return parse_cleveland(in, policy);
}

// ---------------------------------------------------------------------------
// Standardization

Standardizer fit_standardizer(const Matrix& features) {
  Standardizer s;
  const Index n = features.rows();
  const Index p = features.cols();
  if (n == 0) throw Error(kModule, "cannot standardize an empty table");
  s.mean = features.colwise().mean().transpose();
  s.std.resize(p);
  s.constant.assign(static_cast<std::size_t>(p), false);
  for (Index c = 0; c < p; ++c) {
    const double var = (features.col(c).array() - s.mean(c)).square().sum() / static_cast<double>(n);
    const double sd = std::sqrt(var);
    if (sd <= 1e-12 * std::max(1.0, std::abs(s.mean(c)))) {
      s.std(c) = 1.0;
      s.constant[static_cast<std::size_t>(c)] = true;
    } else {
      s.std(c) = sd;
    }
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& raw) const {
  if (raw.cols() != mean.size()) throw Error(kModule, "standardizer column count mismatch");
  return (raw.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
}

Matrix Standardizer::inverse(const Matrix& standardized) const {
  if (standardized.cols() != mean.size()) throw Error(kModule, "standardizer column count mismatch");
  Matrix out = standardized.array().rowwise() * std.transpose().array();
  return out.rowwise() + mean.transpose();
}

void Standardizer::save(std::ostream& out) const {
  out << "format = hybridml-standardizer\n"
      << "version = 1\n"
      << "columns = " << mean.size() << "\n"
      << "mean = " << kv::join(mean) << "\n"
      << "std = " << kv::join(std) << "\n"
      << "constant = ";
  for (std::size_t i = 0; i < constant.size(); ++i) out << (i ? "," : "") << (constant[i] ? 1 : 0);
  out << "\n";
}

Standardizer Standardizer::load(std::istream& in) {
  const auto t = kv::read(in, kModule);
  kv::expect_header(t, "hybridml-standardizer", 1, kModule);
  const auto cols = kv::parse_int(kv::require(t, "columns", kModule), kModule);
  const auto m = kv::parse_doubles(kv::require(t, "mean", kModule), kModule);
  const auto sd = kv::parse_doubles(kv::require(t, "std", kModule), kModule);
  const auto flags = kv::parse_ints(kv::require(t, "constant", kModule), kModule);
  if (static_cast<long long>(m.size()) != cols || static_cast<long long>(sd.size()) != cols ||
      static_cast<long long>(flags.size()) != cols) {
    throw Error(kModule, "standardizer record has inconsistent lengths");
  }
  Standardizer s;
  s.mean = Eigen::Map<const Vector>(m.data(), static_cast<Index>(m.size()));
  s.std = Eigen::Map<const Vector>(sd.data(), static_cast<Index>(sd.size()));
  for (auto f : flags) s.constant.push_back(f != 0);
  return s;
}

Standardized standardize(const Dataset& d) {
  Standardizer s = fit_standardizer(d.features());
  return {Dataset(s.apply(d.features()), d.target(), d.feature_names(), d.imputed_rows()), std::move(s)};
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  if (!(train_fraction > 0 && val_fraction > 0 && test_fraction > 0)) {
    throw Error(kModule, "split fractions must be positive");
  }
  if (std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-12) {
    throw Error(kModule, "split fractions must sum to 1");
  }
}

Split split(Index n_rows, const SplitSpec& spec) {
  spec.validate();
  if (n_rows < 10) throw Error(kModule, "splitting needs at least 10 rows");
  const auto n = static_cast<double>(n_rows);
  // The small epsilon keeps exact products such as 0.2 * 10 from flooring to 1.
  const auto n_val = static_cast<Index>(std::floor(spec.val_fraction * n + 1e-9));
  const auto n_test = static_cast<Index>(std::floor(spec.test_fraction * n + 1e-9));
  const Index n_train = n_rows - n_val - n_test;
  if (n_val == 0 || n_test == 0 || n_train <= 0) throw Error(kModule, "a split would be empty");

  IndexList order(static_cast<std::size_t>(n_rows));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  // Fisher-Yates with std::uniform_int_distribution; deterministic for a given standard library.
  for (Index i = n_rows - 1; i > 0; --i) {
    std::uniform_int_distribution<Index> pick(0, i);
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick(rng))]);
  }
  Split s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

Split split(const Dataset& d, const SplitSpec& spec) { return split(d.n_rows(), spec); }

void Split::save(std::ostream& out) const {
  out << "format = hybridml-split\n"
      << "version = 1\n"
      << "train = " << kv::join(train) << "\n"
      << "val = " << kv::join(val) << "\n"
      << "test = " << kv::join(test) << "\n";
}

Split Split::load(std::istream& in) {
  const auto t = kv::read(in, kModule);
  kv::expect_header(t, "hybridml-split", 1, kModule);
  auto to_list = [&](const char* key) {
    IndexList out;
    for (auto v : kv::parse_ints(kv::require(t, key, kModule), kModule)) out.push_back(static_cast<Index>(v));
    return out;
  };
  return {to_list("train"), to_list("val"), to_list("test")};
}

// ---------------------------------------------------------------------------
// Histograms

Histogram histogram(const Vector& values, int bins) {
  if (bins < 1) throw Error(kModule, "histogram needs at least one bin");
  if (values.size() == 0) throw Error(kModule, "histogram of an empty column");
  double lo = values.minCoeff();
  double hi = values.maxCoeff();
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  Histogram h;
  const double width = (hi - lo) / bins;
  for (int b = 0; b <= bins; ++b) h.edges.push_back(lo + width * b);
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (Index i = 0; i < values.size(); ++i) {
    auto b = static_cast<int>(std::floor((values(i) - lo) / width));
    b = std::clamp(b, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(b)];
  }
  return h;
}

Histogram chol_histogram(const Dataset& d, int bins) { return histogram(d.features().col(d.column("chol")), bins); }

}  // namespace hybridml::data
