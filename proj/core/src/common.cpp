#include "hybridml/common.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace hybridml {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix take_rows(const Matrix& m, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Vector take_rows(const Vector& v, const IndexList& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Index>(i)) = v(rows[i]);
  return out;
}

double sigmoid(double z) noexcept {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) noexcept {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double misclassification_rate(const Vector& prob, const Vector& labels) {
  if (prob.size() != labels.size() || prob.size() == 0) {
    throw Error("metrics", "prediction/label length mismatch or empty input");
  }
  Index wrong = 0;
  for (Index i = 0; i < prob.size(); ++i) {
    const double predicted = prob(i) >= 0.5 ? 1.0 : 0.0;
    if (predicted != labels(i)) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(prob.size());
}

double brier_score(const Vector& prob, const Vector& labels) {
  if (prob.size() != labels.size() || prob.size() == 0) {
    throw Error("metrics", "prediction/label length mismatch or empty input");
  }
  return (prob - labels).squaredNorm() / static_cast<double>(prob.size());
}

double pearson(const Vector& a, const Vector& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("metrics", "pearson needs equal lengths >= 2");
  const Vector da = a.array() - a.mean();
  const Vector db = b.array() - b.mean();
  const double saa = da.squaredNorm();
  const double sbb = db.squaredNorm();
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  const double r = da.dot(db) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace hybridml
