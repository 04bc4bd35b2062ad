#include "hybridml/hyperopt/restart.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace hybridml::hyperopt {

namespace {

constexpr const char* kModule = "hyperopt";

Vector uniform_point(const TestProblem& p, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x(p.lower.size());
  for (Index d = 0; d < x.size(); ++d) x(d) = p.lower(d) + unif(rng) * (p.upper(d) - p.lower(d));
  return x;
}

// One climb state that can be advanced sweep by sweep.
struct Climber {
  const TestProblem& problem;
  Vector x;
  double f;
  double step;

  Climber(const TestProblem& p, Vector start, double initial_step)
      : problem(p), x(std::move(start)), f(p.f(x)), step(initial_step) {}

  void sweep() {
    bool moved = false;
    for (Index d = 0; d < x.size(); ++d) {
      const double range = problem.upper(d) - problem.lower(d);
      for (double dir : {1.0, -1.0}) {
        Vector trial = x;
        trial(d) = std::clamp(trial(d) + dir * step * range, problem.lower(d), problem.upper(d));
        const double v = problem.f(trial);
        if (v < f) {
          f = v;
          x = std::move(trial);
          moved = true;
          break;
        }
      }
    }
    if (!moved) step *= 0.5;
  }
};

TestProblem box_problem(std::string name, std::function<double(const Vector&)> f, Index dims, double global_min) {
  TestProblem p;
  p.name = std::move(name);
  p.f = std::move(f);
  p.lower = Vector::Zero(dims);
  p.upper = Vector::Ones(dims);
  p.global_min = global_min;
  return p;
}

}  // namespace

TestProblem two_basin_problem() {
  return box_problem(
      "two_basin",
      [](const Vector& x) {
        return std::min(40.0 * (x(0) - 0.2) * (x(0) - 0.2) - 1.0, 8.0 * (x(0) - 0.7) * (x(0) - 0.7) - 0.5);
      },
      1, -1.0);
}

TestProblem plateau_problem() {
  return box_problem(
      "plateau",
      [](const Vector& x) {
        const double plateau = 1.0 + 1e-4 * (x(0) + x(1));
        const double r2 = ((x(0) - 0.75) * (x(0) - 0.75) + (x(1) - 0.75) * (x(1) - 0.75)) / (0.1 * 0.1);
        return plateau * std::min(1.0, r2);
      },
      2, 0.0);
}

TestProblem bowl_problem() {
  return box_problem(
      "bowl", [](const Vector& x) { return (x(0) - 0.3) * (x(0) - 0.3) + (x(1) - 0.6) * (x(1) - 0.6); }, 2, 0.0);
}

ClimbResult hill_climb(const TestProblem& problem, const Vector& start, const HillClimbConfig& config) {
  if (start.size() != problem.lower.size()) throw Error(kModule, "start point dimension mismatch");
  Climber c(problem, start, config.initial_step);
  ClimbResult r;
  while (c.step >= config.min_step) {
    c.sweep();
    ++r.iterations;
  }
  r.x = c.x;
  r.f = c.f;
  return r;
}

double basin_probability(const TestProblem& problem, int grid_points, const HillClimbConfig& config) {
  if (problem.lower.size() != 1 || grid_points < 2) throw Error(kModule, "basin probability needs a 1-D problem");
  int hits = 0;
  for (int g = 0; g < grid_points; ++g) {
    // Cell midpoints, so the grid is an unbiased quadrature of the uniform start distribution.
    Vector x(1);
    x(0) = problem.lower(0) + (g + 0.5) / grid_points * (problem.upper(0) - problem.lower(0));
    if (problem.arrived(hill_climb(problem, x, config).f)) ++hits;
  }
  return static_cast<double>(hits) / grid_points;
}

McConvergence mc_convergence_probability(const TestProblem& problem, int restarts, int trials, std::uint64_t seed,
                                         const HillClimbConfig& config) {
  if (trials < 30) throw Error(kModule, "Monte-Carlo convergence estimate needs at least 30 trials");
  if (restarts < 1) throw Error(kModule, "restart count must be at least 1");
  McConvergence out;
  out.restarts = restarts;
  out.trials = trials;
  for (int t = 0; t < trials; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    double best = std::numeric_limits<double>::infinity();
    for (int r = 0; r < restarts; ++r) best = std::min(best, hill_climb(problem, uniform_point(problem, rng), config).f);
    if (!problem.arrived(best)) ++out.failures;
  }
  out.p_bar = static_cast<double>(out.failures) / trials;
  out.std_error = std::sqrt(out.p_bar * (1.0 - out.p_bar) / trials);
  return out;
}

WelchTest welch_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw Error(kModule, "Welch test needs at least 2 values per sample");
  auto moments = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::pair{mean, ss / static_cast<double>(v.size() - 1)};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double qa = va / static_cast<double>(a.size());
  const double qb = vb / static_cast<double>(b.size());
  WelchTest w;
  if (qa + qb == 0.0) {
    w.t = ma == mb ? 0.0 : (ma < mb ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity());
    w.df = static_cast<double>(a.size() + b.size() - 2);
    w.p_less = ma < mb ? 0.0 : (ma == mb ? 0.5 : 1.0);
    w.p_two_sided = ma == mb ? 1.0 : 0.0;
    return w;
  }
  w.t = (ma - mb) / std::sqrt(qa + qb);
  w.df = (qa + qb) * (qa + qb) /
         (qa * qa / static_cast<double>(a.size() - 1) + qb * qb / static_cast<double>(b.size() - 1));
  const boost::math::students_t dist(w.df);
  w.p_less = boost::math::cdf(dist, w.t);
  w.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(w.t)));
  return w;
}

long long iterations_to_arrival(const TestProblem& problem, RestartKind kind, const RestartBenchmarkConfig& config,
                                std::uint64_t seed, bool* capped) {
  Rng rng(seed);
  long long iterations = 0;
  if (capped) *capped = false;
  const auto window = static_cast<std::size_t>(config.adaptive.stall_window);
  while (true) {
    Climber c(problem, uniform_point(problem, rng), config.climb.initial_step);
    if (problem.arrived(c.f)) return iterations;
    std::deque<double> history{c.f};
    while (c.step >= config.climb.min_step) {
      if (iterations >= config.iteration_cap) {
        if (capped) *capped = true;
        return iterations;
      }
      c.sweep();
      ++iterations;
      if (problem.arrived(c.f)) return iterations;
      if (kind == RestartKind::adaptive) {
        history.push_back(c.f);
        if (history.size() > window + 1) history.pop_front();
        if (history.size() == window + 1 && history.front() - c.f < config.adaptive.delta * std::abs(history.front())) {
          break;
        }
      }
    }
  }
}

RestartBenchmark restart_benchmark(const TestProblem& problem, const RestartBenchmarkConfig& config,
                                   std::uint64_t seed) {
  if (config.trials < 2) throw Error(kModule, "restart benchmark needs at least 2 trials");
  config.adaptive.validate();
  RestartBenchmark out;
  std::vector<double> random_n;
  std::vector<double> adaptive_n;
  for (int t = 0; t < config.trials; ++t) {
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    bool capped = false;
    out.random_iterations.push_back(iterations_to_arrival(problem, RestartKind::random, config, trial_seed, &capped));
    out.random_capped += capped;
    out.adaptive_iterations.push_back(
        iterations_to_arrival(problem, RestartKind::adaptive, config, trial_seed, &capped));
    out.adaptive_capped += capped;
    random_n.push_back(static_cast<double>(out.random_iterations.back()));
    adaptive_n.push_back(static_cast<double>(out.adaptive_iterations.back()));
  }
  for (double v : random_n) out.mean_random += v / config.trials;
  for (double v : adaptive_n) out.mean_adaptive += v / config.trials;
  out.test = welch_test(adaptive_n, random_n);
  return out;
}

}  // namespace hybridml::hyperopt
