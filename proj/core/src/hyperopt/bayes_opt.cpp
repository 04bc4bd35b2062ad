#include "hybridml/hyperopt/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace hybridml::hyperopt {

namespace {

constexpr const char* kModule = "hyperopt";

// Coordinate pattern search maximizing `score` from each start; step halves when no move helps.
Proposal pattern_search(const std::function<double(const Vector&)>& score, const SearchSpace& space,
                        std::vector<Vector> starts, const AcquisitionConfig& config) {
  Proposal best{Vector(), -std::numeric_limits<double>::infinity()};
  for (auto& start : starts) {
    Vector u = space.snap(start);
    double value = score(u);
    for (double step = config.initial_step; step >= config.min_step;) {
      bool moved = false;
      for (Index d = 0; d < u.size(); ++d) {
        for (double dir : {1.0, -1.0}) {
          Vector trial = u;
          trial(d) = std::clamp(trial(d) + dir * step, 0.0, 1.0);
          trial = space.snap(trial);
          const double v = score(trial);
          if (v > value) {
            value = v;
            u = std::move(trial);
            moved = true;
            break;
          }
        }
      }
      if (!moved) step *= 0.5;
    }
    if (value > best.value) best = {u, value};
  }
  return best;
}

std::vector<Vector> uniform_starts(Index dims, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vector> starts;
  for (int s = 0; s < count; ++s) {
    Vector u(dims);
    for (Index d = 0; d < dims; ++d) u(d) = unif(rng);
    starts.push_back(std::move(u));
  }
  return starts;
}

}  // namespace

const char* restart_kind_name(RestartKind kind) { return kind == RestartKind::random ? "random" : "adaptive"; }

RestartKind restart_kind_from_name(const std::string& name) {
  if (name == "random") return RestartKind::random;
  if (name == "adaptive") return RestartKind::adaptive;
  throw Error(kModule, "unknown restart policy '" + name + "' (valid: random, adaptive)");
}

void RestartPolicy::validate() const {
  if (kind == RestartKind::adaptive && (stall_window < 1 || !(delta > 0.0))) {
    throw Error(kModule, "adaptive restart needs stall_window >= 1 and delta > 0");
  }
}

const char* bo_phase_name(BoPhase phase) {
  switch (phase) {
    case BoPhase::initial: return "initial";
    case BoPhase::acquisition: return "acquisition";
    case BoPhase::exploration: return "exploration";
  }
  throw Error(kModule, "unknown phase");
}

Proposal propose_next(const GpSurrogate& gp, const SearchSpace& space, double f_star,
                      const std::vector<Vector>& warm_starts, const AcquisitionConfig& config, std::uint64_t seed) {
  auto starts = uniform_starts(space.size(), config.random_starts, seed);
  starts.insert(starts.end(), warm_starts.begin(), warm_starts.end());
  return pattern_search([&](const Vector& u) { return expected_improvement(gp, u, f_star); }, space,
                        std::move(starts), config);
}

Proposal most_uncertain_point(const GpSurrogate& gp, const SearchSpace& space, const AcquisitionConfig& config,
                              std::uint64_t seed) {
  return pattern_search([&](const Vector& u) { return gp.posterior(u).std; }, space,
                        uniform_starts(space.size(), config.random_starts, seed), config);
}

Matrix latin_hypercube(int points, Index dims, std::uint64_t seed) {
  if (points < 1 || dims < 1) throw Error(kModule, "Latin hypercube needs points >= 1 and dims >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix u(points, dims);
  std::vector<int> strata(static_cast<std::size_t>(points));
  for (Index d = 0; d < dims; ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int p = 0; p < points; ++p) u(p, d) = (strata[static_cast<std::size_t>(p)] + unif(rng)) / points;
  }
  return u;
}

BoResult bo_minimize(const Objective& objective, const SearchSpace& space, const BoConfig& config,
                     std::uint64_t seed) {
  space.validate();
  config.policy.validate();
  if (config.initial_points < 2 || config.budget < config.initial_points) {
    throw Error(kModule, "BO needs budget >= initial_points >= 2");
  }
  BoResult result;
  Matrix observed_u(0, space.size());
  Vector observed_f(0);
  double worst = -std::numeric_limits<double>::infinity();
  double incumbent = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vector& unit, BoPhase phase, double acquisition, double max_ei) {
    BoStep step;
    step.iteration = static_cast<int>(result.trace.size());
    step.phase = phase;
    step.x = space.from_unit(unit);
    step.acquisition = acquisition;
    step.max_ei = max_ei;
    double value = objective(step.x);
    if (!std::isfinite(value)) {
      value = std::isfinite(worst) ? (worst != 0.0 ? worst + 9.0 * std::abs(worst) : 1.0) : 1.0;
      step.penalized = true;
      ++result.penalized_points;
    } else {
      worst = std::max(worst, value);
    }
    step.f = value;
    if (value < incumbent) {
      incumbent = value;
      result.best_x = step.x;
    }
    step.incumbent = incumbent;
    result.trace.push_back(step);
    observed_u.conservativeResize(observed_u.rows() + 1, Eigen::NoChange);
    observed_u.row(observed_u.rows() - 1) = space.snap(unit).transpose();
    observed_f.conservativeResize(observed_f.size() + 1);
    observed_f(observed_f.size() - 1) = value;
    return space.snap(unit);
  };

  const Matrix design = latin_hypercube(config.initial_points, space.size(), derive_seed(seed, 0));
  for (Index p = 0; p < design.rows(); ++p) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    evaluate(design.row(p).transpose(), BoPhase::initial, nan, nan);
  }

  // Pin the signal grid to the initial design's spread so grid choices can repeat across iterations.
  GpConfig gp_config = config.gp;
  if (gp_config.signal_reference <= 0.0) {
    const double spread = std::sqrt((observed_f.array() - observed_f.mean()).square().mean());
    gp_config.signal_reference = spread > 0.0 ? spread : 1.0;
  }
  GpSurrogate gp = gp_fit(observed_u, observed_f, gp_config);
  std::vector<Vector> memory;
  bool explore_next = false;
  int since_restart = 0;
  for (int it = config.initial_points; it < config.budget; ++it) {
    const std::uint64_t step_seed = derive_seed(seed, static_cast<std::uint64_t>(it));
    const Proposal best_ei = propose_next(gp, space, incumbent, memory, config.acquisition, step_seed);
    Proposal next = best_ei;
    BoPhase phase = BoPhase::acquisition;
    if (explore_next) {
      next = most_uncertain_point(gp, space, config.acquisition, step_seed);
      phase = BoPhase::exploration;
      explore_next = false;
    } else {
      memory.push_back(next.unit);
    }
    const Vector u = evaluate(next.unit, phase, next.value, best_ei.value);

    // Refit when the grid-selected hyperparameters move; otherwise extend the factor by a row.
    GpSurrogate refit = gp_fit(observed_u, observed_f, gp_config);
    if (refit.length_scale == gp.length_scale && refit.signal_variance == gp.signal_variance &&
        refit.jitter == gp.jitter && gp_extend(gp, u, observed_f(observed_f.size() - 1))) {
      ++result.incremental_updates;
    } else {
      gp = std::move(refit);
    }

    ++since_restart;
    if (config.policy.kind == RestartKind::adaptive && since_restart >= config.policy.stall_window) {
      const auto n = result.trace.size();
      const double then = result.trace[n - 1 - static_cast<std::size_t>(config.policy.stall_window)].incumbent;
      if (then - incumbent < config.policy.delta * std::abs(then)) {
        result.trace.back().restart = true;
        ++result.restart_events;
        memory.clear();
        explore_next = true;
        since_restart = 0;
      }
    }
  }
  result.best_f = incumbent;
  return result;
}

}  // namespace hybridml::hyperopt
