#pragma once

#include "hybridml/learners/bnn.hpp"
#include "hybridml/learners/forest.hpp"
#include "hybridml/learners/gbm.hpp"
#include "hybridml/learners/svm.hpp"

#include <array>
#include <iosfwd>
#include <string_view>
#include <variant>

namespace hybridml::learners {

enum class LearnerKind { bnn, rf, gb, svm };

inline constexpr std::array<LearnerKind, 4> kAllLearners{LearnerKind::bnn, LearnerKind::rf, LearnerKind::gb,
                                                         LearnerKind::svm};

/// Short display name: BNN, RF, GB, SVM.
std::string_view learner_name(LearnerKind kind);
LearnerKind learner_from_name(std::string_view name);

struct LearnerConfigs {
  BnnConfig bnn;
  ForestConfig rf;
  GbmConfig gb;
  SvmConfig svm;
};

using AnyModel = std::variant<BnnModel, ForestModel, GbmModel, SvmModel>;

LearnerKind kind_of(const AnyModel& model);

AnyModel train(LearnerKind kind, const Matrix& x, const Vector& y, const LearnerConfigs& configs);

/// Class-1 probabilities in [0,1]; throws on a feature-count mismatch.
Vector predict(const AnyModel& model, const Matrix& rows);

/// Versioned text file: "hybridml-model 1", the learner name, then the learner's fields.
void save_model(std::ostream& out, const AnyModel& model);
AnyModel load_model(std::istream& in);

inline constexpr int kModelFormatVersion = 1;

}  // namespace hybridml::learners
