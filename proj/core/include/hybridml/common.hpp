#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridml {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

using IndexList = std::vector<Index>;

/// Error thrown on violated preconditions and malformed input. what() reads "<module>: <message>".
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& message)
      : std::runtime_error(module + ": " + message), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

using Rng = std::mt19937_64;

/// splitmix64 finalizer over (seed, stream); gives independent per-task RNG streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Rows of `m` selected by `rows`, in order.
Matrix take_rows(const Matrix& m, const IndexList& rows);
Vector take_rows(const Vector& v, const IndexList& rows);

/// Numerically stable logistic function.
double sigmoid(double z) noexcept;

/// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept;

/// Fraction of rows where (p >= 0.5) disagrees with the 0/1 label.
double misclassification_rate(const Vector& prob, const Vector& labels);

/// Mean squared difference between probabilities and 0/1 labels.
double brier_score(const Vector& prob, const Vector& labels);

/// Pearson correlation; returns 0 if either vector has zero variance.
double pearson(const Vector& a, const Vector& b);

/// Format a double with enough digits to round-trip (%.17g).
std::string format_double(double x);

}  // namespace hybridml
