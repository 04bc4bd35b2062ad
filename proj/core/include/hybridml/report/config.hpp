#pragma once

#include "hybridml/dataset.hpp"
#include "hybridml/ensemble.hpp"
#include "hybridml/feature_integration.hpp"
#include "hybridml/hyperopt/bayes_opt.hpp"
#include "hybridml/hyperopt/restart.hpp"
#include "hybridml/learners.hpp"
#include "hybridml/stacking.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hybridml::report {

/// Bounds of the tuned hyperparameters: GB shrinkage, GB depth, RF tree count, SVM C (log scale).
struct TuneSpace {
  double gb_shrinkage_min = 0.01;
  double gb_shrinkage_max = 0.5;
  int gb_depth_min = 1;
  int gb_depth_max = 4;
  int rf_trees_min = 10;
  int rf_trees_max = 200;
  double svm_c_min = 0.01;
  double svm_c_max = 100.0;

  hyperopt::SearchSpace search_space() const;
};

struct ExperimentConfig {
  std::filesystem::path data_path = "data/processed.cleveland.data";
  data::MissingPolicy missing = data::MissingPolicy::median;
  data::SplitSpec split{0.6, 0.2, 0.2, 0};
  /// Re-splits behind the fig1 whiskers (split seeds derived from the global seed).
  int resplits = 5;

  learners::LearnerConfigs learners;

  ensemble::EnsembleConfig ensemble;
  std::vector<double> sweep_alphas{0.0, 0.5, 1.0};
  std::vector<double> sweep_betas{0.0, 0.05, 0.1, 0.2};

  int stacking_folds = 5;
  stacking::MetaConfig meta;

  features::GainConfig mi;
  int mi_permutations = 199;

  bool tune_enabled = true;
  int tune_seeds = 5;
  hyperopt::BoConfig bo;
  TuneSpace tune_space;

  bool restart_enabled = true;
  hyperopt::RestartBenchmarkConfig restart;
  int mc_trials = 400;
  std::vector<int> mc_restarts{1, 2, 4, 8};
  int basin_grid = 20001;

  std::uint64_t seed = 20240601;
  std::filesystem::path out_dir = "out";

  /// Throws Error("report", "[section] key: ...") naming the first invalid key.
  void validate() const;

  /// Learner configs with seeds derived from the global seed for split `split_index`.
  learners::LearnerConfigs seeded_learners(int split_index = 0) const;
  /// Split spec for re-split `index` (0 is the primary split).
  data::SplitSpec split_for(int index) const;
};

/// Parses the INI text. Unknown sections or keys are errors. Relative data paths are resolved
/// against `base_dir`.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration as INI text (parse_config of this text reproduces the config).
std::string config_to_ini(const ExperimentConfig& config);

}  // namespace hybridml::report
