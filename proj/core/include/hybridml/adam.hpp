#pragma once

#include "hybridml/common.hpp"

namespace hybridml {

/// Adam moment state for a flat parameter vector (minimization convention).
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Vector first_moment;
  Vector second_moment;
  long long step = 0;

  void reset(Index n);

  /// Advances the moments with `gradient` and returns the step to subtract from the parameters.
  Vector step_for(const Vector& gradient, double learning_rate);
};

}  // namespace hybridml
