#pragma once

#include "hybridml/report/config.hpp"
#include "hybridml/report/csv.hpp"
#include "hybridml/report/output.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hybridml::report {

inline constexpr const char* kVersion = "1.0.0";

/// One seeded split with features standardized by statistics of its training rows only.
struct SplitData {
  int index = 0;
  data::Split split;
  data::Standardizer standardizer;
  Matrix x_train, x_val, x_test;
  Vector y_train, y_val, y_test;
};

/// Held-out outcome of the weight-optimized ensemble on one re-split.
struct ResplitOutcome {
  int split = 0;
  /// Test misclassification rate per base learner, in kAllLearners order.
  Vector base_test_error;
  Vector weights;
  double ensemble_test_error = 0.0;
  ensemble::SolverPath path = ensemble::SolverPath::closed_form;
};

/// One BO run of the ensemble tuning objective.
struct TuneRun {
  int seed_index = 0;
  hyperopt::BoResult result;
};

/// Stateful runner. Each stage reads the dataset, splits, and base models through lazily filled caches,
/// so a full run trains every model once. Stages write their tables and plots through `out` and also
/// keep them in tables().
class Pipeline {
 public:
  explicit Pipeline(ExperimentConfig config, std::ostream* log = nullptr);

  const ExperimentConfig& config() const noexcept { return config_; }
  const data::Dataset& dataset();
  const SplitData& split_data(int index);
  /// Base models trained on the training rows of split `index`, in kAllLearners order.
  const std::vector<learners::AnyModel>& models(int index);

  void ingest(OutputDir& out);
  void train(OutputDir& out);
  std::vector<ResplitOutcome> ensemble(OutputDir& out);
  void stack(OutputDir& out);
  void mi(OutputDir& out);
  std::vector<TuneRun> tune(OutputDir& out);
  void restart_bench(OutputDir& out);

  /// CSV name (without extension) -> table, for every table produced so far.
  const std::map<std::string, CsvTable>& tables() const noexcept { return tables_; }

 private:
  void emit(OutputDir& out, const std::string& name, CsvTable table);
  void note(const std::string& message);

  ExperimentConfig config_;
  std::ostream* log_;
  std::optional<data::Dataset> dataset_;
  std::map<int, SplitData> splits_;
  std::map<int, std::vector<learners::AnyModel>> models_;
  std::map<std::string, CsvTable> tables_;
};

struct ExperimentReport {
  CsvTable fig1, fig2, fig3, fig4;
  std::map<std::string, CsvTable> tables;
  /// Key/value run metadata; everything except wall_seconds is a function of the config.
  std::vector<std::pair<std::string, std::string>> metadata;
  double wall_seconds = 0.0;
};

/// Every stage in order, then fig1..fig4 SVGs, metadata.txt, config.ini, and MANIFEST. On a stage error
/// the MANIFEST is written with status partial and the error is rethrown.
ExperimentReport run_all(const ExperimentConfig& config, std::ostream* log = nullptr);

/// Renders fig1..fig4.svg from the CSV tables present in `out`; throws if none is present.
std::vector<std::string> render_plots(OutputDir& out);

/// Resolved plan: data, split, learners with their seeds, experiments, and output paths. Nothing runs.
std::string describe(const ExperimentConfig& config);

}  // namespace hybridml::report
