#include "hybridml/learners.hpp"

#include <istream>
#include <ostream>
#include <string>

namespace hybridml::learners {

namespace {
constexpr const char* kModule = "learners";
}

std::string_view learner_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::bnn: return "BNN";
    case LearnerKind::rf: return "RF";
    case LearnerKind::gb: return "GB";
    case LearnerKind::svm: return "SVM";
  }
  throw Error(kModule, "unknown learner kind");
}

LearnerKind learner_from_name(std::string_view name) {
  for (LearnerKind k : kAllLearners) {
    if (learner_name(k) == name) return k;
  }
  throw Error(kModule, "unknown learner '" + std::string(name) + "' (valid: BNN, RF, GB, SVM)");
}

LearnerKind kind_of(const AnyModel& model) { return static_cast<LearnerKind>(model.index()); }

AnyModel train(LearnerKind kind, const Matrix& x, const Vector& y, const LearnerConfigs& configs) {
  switch (kind) {
    case LearnerKind::bnn: return bnn_train(x, y, configs.bnn);
    case LearnerKind::rf: return rf_train(x, y, configs.rf);
    case LearnerKind::gb: return gb_train(x, y, configs.gb);
    case LearnerKind::svm: return svm_train(x, y, configs.svm);
  }
  throw Error(kModule, "unknown learner kind");
}

Vector predict(const AnyModel& model, const Matrix& rows) {
  return std::visit([&](const auto& m) -> Vector { return m.predict_proba(rows); }, model);
}

void save_model(std::ostream& out, const AnyModel& model) {
  out << "hybridml-model " << kModelFormatVersion << '\n' << "kind " << learner_name(kind_of(model)) << '\n';
  std::visit([&](const auto& m) { m.save(out); }, model);
  if (!out) throw Error(kModule, "failed writing model file");
}

AnyModel load_model(std::istream& in) {
  std::string tag;
  int version = 0;
  std::string kind_key;
  std::string kind;
  if (!(in >> tag >> version) || tag != "hybridml-model") throw Error(kModule, "not a hybridml model file");
  if (version != kModelFormatVersion) {
    throw Error(kModule, "unsupported model format version " + std::to_string(version));
  }
  if (!(in >> kind_key >> kind) || kind_key != "kind") throw Error(kModule, "model file lacks a kind line");
  switch (learner_from_name(kind)) {
    case LearnerKind::bnn: return BnnModel::load(in);
    case LearnerKind::rf: return ForestModel::load(in);
    case LearnerKind::gb: return GbmModel::load(in);
    case LearnerKind::svm: return SvmModel::load(in);
  }
  throw Error(kModule, "unknown learner kind");
}

}  // namespace hybridml::learners
