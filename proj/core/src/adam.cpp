#include "hybridml/adam.hpp"

#include <cmath>

namespace hybridml {

void AdamState::reset(Index n) {
  first_moment = Vector::Zero(n);
  second_moment = Vector::Zero(n);
  step = 0;
}

Vector AdamState::step_for(const Vector& gradient, double learning_rate) {
  if (first_moment.size() != gradient.size()) reset(gradient.size());
  ++step;
  first_moment = beta1 * first_moment + (1.0 - beta1) * gradient;
  second_moment = beta2 * second_moment + (1.0 - beta2) * gradient.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  return learning_rate * ((first_moment / c1).array() / ((second_moment / c2).array().sqrt() + epsilon)).matrix();
}

}  // namespace hybridml
