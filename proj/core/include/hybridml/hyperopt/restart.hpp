#pragma once

#include "hybridml/hyperopt/bayes_opt.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace hybridml::hyperopt {

/// Box-constrained test function with a known global minimum value.
struct TestProblem {
  std::string name;
  std::function<double(const Vector&)> f;
  Vector lower;
  Vector upper;
  double global_min = 0.0;
  /// A value within this of global_min counts as arrival.
  double tolerance = 1e-6;

  bool arrived(double value) const { return value <= global_min + tolerance; }
};

/// min(40 (x - 0.2)^2 - 1, 8 (x - 0.7)^2 - 0.5) on [0,1]: narrow global basin, wide local one.
TestProblem two_basin_problem();
/// Gently sloped plateau 1 + 1e-4 (x + y) on [0,1]^2 with a narrow quadratic well reaching 0 at (0.75, 0.75).
TestProblem plateau_problem();
/// (x - 0.3)^2 + (y - 0.6)^2 on [0,1]^2.
TestProblem bowl_problem();

struct HillClimbConfig {
  /// First step as a fraction of each dimension's range.
  double initial_step = 0.1;
  /// Local search has converged once the step falls below this fraction.
  double min_step = 1e-6;
};

struct ClimbResult {
  Vector x;
  double f = 0.0;
  /// Coordinate sweeps performed.
  long long iterations = 0;
};

/// Coordinate hill climbing: one sweep tries +-step along every coordinate and keeps improving
/// moves; a sweep without a move halves the step. Runs until the step is below min_step.
ClimbResult hill_climb(const TestProblem& problem, const Vector& start, const HillClimbConfig& config);

/// Fraction of `grid_points` equispaced starts on a 1-D problem whose climb arrives at the global minimum.
double basin_probability(const TestProblem& problem, int grid_points, const HillClimbConfig& config);

struct McConvergence {
  int restarts = 0;
  int trials = 0;
  int failures = 0;
  /// failures / trials: estimated probability that R uniform restarts all miss the global basin.
  double p_bar = 0.0;
  double std_error = 0.0;
};

/// Trial i draws its restart points from stream derive_seed(seed, i), so the first R points of a
/// trial are shared by every larger R and p_bar is nonincreasing in R. Needs trials >= 30.
McConvergence mc_convergence_probability(const TestProblem& problem, int restarts, int trials, std::uint64_t seed,
                                         const HillClimbConfig& config);

struct WelchTest {
  double t = 0.0;
  double df = 0.0;
  /// P(T <= t): small when mean(a) < mean(b).
  double p_less = 0.0;
  double p_two_sided = 0.0;
};

/// Welch's unequal-variance t-test of mean(a) - mean(b). Each sample needs >= 2 values.
WelchTest welch_test(const std::vector<double>& a, const std::vector<double>& b);

struct RestartBenchmarkConfig {
  int trials = 100;
  HillClimbConfig climb;
  /// Stall rule for the adaptive policy (kind is ignored).
  RestartPolicy adaptive;
  long long iteration_cap = 200000;
};

struct RestartBenchmark {
  std::vector<long long> random_iterations;
  std::vector<long long> adaptive_iterations;
  /// Trials stopped at iteration_cap before arriving.
  int random_capped = 0;
  int adaptive_capped = 0;
  double mean_random = 0.0;
  double mean_adaptive = 0.0;
  /// Welch test of adaptive against random.
  WelchTest test;
};

/// Sweeps until first arrival within tolerance of the global minimum, restarting from a uniform point
/// when the climb converges (random policy) or additionally when the relative improvement over the
/// last stall_window sweeps is below delta (adaptive policy). Trial t of both policies uses the same
/// seed stream.
long long iterations_to_arrival(const TestProblem& problem, RestartKind kind, const RestartBenchmarkConfig& config,
                                std::uint64_t seed, bool* capped = nullptr);

RestartBenchmark restart_benchmark(const TestProblem& problem, const RestartBenchmarkConfig& config,
                                   std::uint64_t seed);

}  // namespace hybridml::hyperopt
