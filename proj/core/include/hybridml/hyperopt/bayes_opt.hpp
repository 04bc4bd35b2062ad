#pragma once

#include "hybridml/hyperopt/gp.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace hybridml::hyperopt {

enum class RestartKind { random, adaptive };

const char* restart_kind_name(RestartKind kind);
RestartKind restart_kind_from_name(const std::string& name);

/// random: every proposal starts from fresh uniform points plus remembered local optima.
/// adaptive: additionally, when the incumbent improves by less than `delta` (relative) over
/// `stall_window` consecutive iterations, memory is cleared and the next point maximizes posterior std.
struct RestartPolicy {
  RestartKind kind = RestartKind::adaptive;
  int stall_window = 5;
  double delta = 1e-3;

  void validate() const;
};

struct AcquisitionConfig {
  int random_starts = 32;
  double initial_step = 0.25;
  double min_step = 1e-4;
};

struct Proposal {
  /// Snapped unit-cube point.
  Vector unit;
  double value = 0.0;
};

/// Multi-start coordinate pattern search maximizing EI over the unit cube, evaluated at snapped
/// points. `warm_starts` are tried in addition to the uniform starts.
Proposal propose_next(const GpSurrogate& gp, const SearchSpace& space, double f_star,
                      const std::vector<Vector>& warm_starts, const AcquisitionConfig& config, std::uint64_t seed);

/// Same search maximizing the posterior std (pure exploration).
Proposal most_uncertain_point(const GpSurrogate& gp, const SearchSpace& space, const AcquisitionConfig& config,
                              std::uint64_t seed);

enum class BoPhase { initial, acquisition, exploration };

const char* bo_phase_name(BoPhase phase);

struct BoStep {
  int iteration = 0;
  BoPhase phase = BoPhase::initial;
  /// Point in the original (not unit) coordinates.
  Vector x;
  /// Recorded objective; a penalty if the objective returned a non-finite value.
  double f = 0.0;
  double incumbent = 0.0;
  /// Criterion value that selected this point (EI, or posterior std for exploration); NaN for initial points.
  double acquisition = 0.0;
  /// Maximum EI over the domain at this iteration, also computed for exploration steps; NaN for initial points.
  double max_ei = 0.0;
  bool penalized = false;
  /// A restart event fired after this step.
  bool restart = false;
};

struct BoConfig {
  int budget = 20;
  int initial_points = 3;
  RestartPolicy policy;
  GpConfig gp;
  AcquisitionConfig acquisition;
};

struct BoResult {
  std::vector<BoStep> trace;
  Vector best_x;
  double best_f = 0.0;
  int restart_events = 0;
  int penalized_points = 0;
  /// Iterations where the GP was extended by a row instead of refit.
  int incremental_updates = 0;
};

using Objective = std::function<double(const Vector& x)>;

/// Latin-hypercube initial design in the unit cube (one point per stratum and dimension).
Matrix latin_hypercube(int points, Index dims, std::uint64_t seed);

/// GP/EI minimization of `objective` over `space`. Needs budget >= initial_points >= 2.
BoResult bo_minimize(const Objective& objective, const SearchSpace& space, const BoConfig& config,
                     std::uint64_t seed);

}  // namespace hybridml::hyperopt
