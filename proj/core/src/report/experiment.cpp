#include "hybridml/report/experiment.hpp"

#include "hybridml/report/svg.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

namespace hybridml::report {

namespace {

constexpr const char* kModule = "report";
constexpr int kCholBins = 10;
constexpr int kDensityGrid = 128;

// Stream ids for derive_seed(config.seed, ...). Kept apart from the split (100+) and learner (1000+) ids.
constexpr std::uint64_t kStackStream = 300;
constexpr std::uint64_t kMiStream = 400;
constexpr std::uint64_t kBnnStream = 450;
constexpr std::uint64_t kTuneStream = 600;
constexpr std::uint64_t kRestartStream = 700;
constexpr std::uint64_t kMcStream = 800;

std::vector<std::string> learner_names() {
  std::vector<std::string> names;
  for (auto kind : learners::kAllLearners) names.emplace_back(learners::learner_name(kind));
  return names;
}

std::string text(double v) { return cell(v); }

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::vector<Vector> predict_all(const std::vector<learners::AnyModel>& models, const Matrix& rows) {
  std::vector<Vector> out;
  for (const auto& m : models) out.push_back(learners::predict(m, rows));
  return out;
}

CsvTable key_values(const std::vector<std::pair<std::string, std::string>>& items) {
  CsvTable t;
  t.header = {"key", "value"};
  for (const auto& [k, v] : items) t.add_row({k, v});
  return t;
}

void render(OutputDir& out, const std::map<std::string, CsvTable>& tables, std::vector<std::string>& written) {
  for (const auto& kind : plot_kinds()) {
    const auto it = tables.find(kind);
    if (it == tables.end() || it->second.empty()) continue;
    out.write(kind + ".svg", plot(it->second, kind));
    written.push_back(kind + ".svg");
  }
}

}  // namespace

Pipeline::Pipeline(ExperimentConfig config, std::ostream* log) : config_(std::move(config)), log_(log) {
  config_.validate();
}

void Pipeline::note(const std::string& message) {
  if (log_) *log_ << message << '\n' << std::flush;
}

void Pipeline::emit(OutputDir& out, const std::string& name, CsvTable table) {
  out.write(name + ".csv", to_csv(table));
  tables_[name] = std::move(table);
}

const data::Dataset& Pipeline::dataset() {
  if (!dataset_) {
    if (!std::filesystem::is_regular_file(config_.data_path)) {
      throw Error(kModule, "data file not found: " + config_.data_path.string());
    }
    dataset_ = data::load_cleveland(config_.data_path, config_.missing);
  }
  return *dataset_;
}

const SplitData& Pipeline::split_data(int index) {
  auto it = splits_.find(index);
  if (it != splits_.end()) return it->second;
  const auto& d = dataset();
  SplitData s;
  s.index = index;
  s.split = data::split(d, config_.split_for(index));
  s.standardizer = data::fit_standardizer(take_rows(d.features(), s.split.train));
  s.x_train = s.standardizer.apply(take_rows(d.features(), s.split.train));
  s.x_val = s.standardizer.apply(take_rows(d.features(), s.split.val));
  s.x_test = s.standardizer.apply(take_rows(d.features(), s.split.test));
  s.y_train = take_rows(d.target(), s.split.train);
  s.y_val = take_rows(d.target(), s.split.val);
  s.y_test = take_rows(d.target(), s.split.test);
  return splits_.emplace(index, std::move(s)).first->second;
}

const std::vector<learners::AnyModel>& Pipeline::models(int index) {
  auto it = models_.find(index);
  if (it != models_.end()) return it->second;
  const SplitData& s = split_data(index);
  const auto configs = config_.seeded_learners(index);
  std::vector<learners::AnyModel> trained;
  for (auto kind : learners::kAllLearners) {
    trained.push_back(learners::train(kind, s.x_train, s.y_train, configs));
  }
  return models_.emplace(index, std::move(trained)).first->second;
}

void Pipeline::ingest(OutputDir& out) {
  note("[ingest] " + config_.data_path.string());
  const auto& d = dataset();
  const SplitData& s = split_data(0);

  CsvTable summary;
  summary.header = {"feature", "mean", "std", "min", "max"};
  for (Index j = 0; j < d.n_cols(); ++j) {
    const auto col = d.features().col(j);
    const double m = col.mean();
    const double sd = std::sqrt((col.array() - m).square().mean());
    summary.add_row({d.feature_names()[static_cast<std::size_t>(j)], text(m), text(sd), text(col.minCoeff()),
                     text(col.maxCoeff())});
  }
  emit(out, "dataset_summary", std::move(summary));

  emit(out, "dataset_info",
       key_values({{"rows", cell(static_cast<long long>(d.n_rows()))},
                   {"features", cell(static_cast<long long>(d.n_cols()))},
                   {"positives", cell(d.target().sum())},
                   {"imputed_rows", cell(static_cast<long long>(d.imputed_rows()))},
                   {"missing_policy", config_.missing == data::MissingPolicy::median ? "median" : "drop"},
                   {"train_rows", cell(static_cast<long long>(s.split.train.size()))},
                   {"val_rows", cell(static_cast<long long>(s.split.val.size()))},
                   {"test_rows", cell(static_cast<long long>(s.split.test.size()))}}));

  const auto hist = data::chol_histogram(d, kCholBins);
  CsvTable chol;
  chol.header = {"bin", "lower", "upper", "count"};
  for (std::size_t b = 0; b < hist.counts.size(); ++b) {
    chol.add_row({cell(static_cast<long long>(b)), text(hist.edges[b]), text(hist.edges[b + 1]),
                  cell(static_cast<long long>(hist.counts[b]))});
  }
  emit(out, "chol_histogram", std::move(chol));

  std::ostringstream split_text;
  s.split.save(split_text);
  out.write("split.txt", split_text.str());
  std::ostringstream standardizer_text;
  s.standardizer.save(standardizer_text);
  out.write("standardizer.txt", standardizer_text.str());
}

void Pipeline::train(OutputDir& out) {
  note("[train] fitting BNN, RF, GB, SVM on split 0");
  const SplitData& s = split_data(0);
  const auto& ms = models(0);
  const auto names = learner_names();

  CsvTable metrics;
  metrics.header = {"model", "train_error", "val_error", "test_error", "val_brier", "test_brier"};
  for (std::size_t m = 0; m < ms.size(); ++m) {
    std::ostringstream file;
    learners::save_model(file, ms[m]);
    out.write("models/" + names[m] + ".model", file.str());
    const Vector p_train = learners::predict(ms[m], s.x_train);
    const Vector p_val = learners::predict(ms[m], s.x_val);
    const Vector p_test = learners::predict(ms[m], s.x_test);
    metrics.add_row({names[m], text(misclassification_rate(p_train, s.y_train)),
                     text(misclassification_rate(p_val, s.y_val)), text(misclassification_rate(p_test, s.y_test)),
                     text(brier_score(p_val, s.y_val)), text(brier_score(p_test, s.y_test))});
  }
  emit(out, "train_metrics", std::move(metrics));

  const auto& bnn = std::get<learners::BnnModel>(ms[0]);
  const auto& forest = std::get<learners::ForestModel>(ms[1]);
  const auto& gbm = std::get<learners::GbmModel>(ms[2]);
  const auto& svm = std::get<learners::SvmModel>(ms[3]);

  const auto importance = learners::rf_feature_importance(forest);
  CsvTable imp;
  imp.header = {"feature", "importance", "mean_decrease"};
  for (Index j = 0; j < importance.importance.size(); ++j) {
    imp.add_row({dataset().feature_names()[static_cast<std::size_t>(j)], text(importance.importance(j)),
                 text(importance.mean_decrease(j))});
  }
  emit(out, "rf_importance", std::move(imp));

  CsvTable gb_trace;
  gb_trace.header = {"stage", "loss"};
  for (std::size_t t = 0; t < gbm.loss_trace.size(); ++t) {
    gb_trace.add_row({cell(static_cast<long long>(t)), text(gbm.loss_trace[t])});
  }
  emit(out, "gb_loss_trace", std::move(gb_trace));

  CsvTable elbo;
  elbo.header = {"epoch", "elbo"};
  for (std::size_t t = 0; t < bnn.elbo_trace.size(); ++t) {
    elbo.add_row({cell(static_cast<long long>(t)), text(bnn.elbo_trace[t])});
  }
  emit(out, "bnn_elbo_trace", std::move(elbo));

  const auto samples = learners::stack_samples(
      learners::bnn_predict_samples(bnn, s.x_test, bnn.predict_samples, derive_seed(config_.seed, kBnnStream)));
  const auto u = learners::uncertainty_from_samples(samples);
  CsvTable unc;
  unc.header = {"row", "label", "mean_prob", "epistemic", "aleatoric", "total", "ks_statistic", "non_degenerate"};
  for (Index i = 0; i < samples.cols(); ++i) {
    const Vector col = samples.col(i);
    const auto ks = learners::ks_degeneracy_check(col);
    unc.add_row({cell(static_cast<long long>(s.split.test[static_cast<std::size_t>(i)])), text(s.y_test(i)),
                 text(col.mean()), text(u.epistemic(i)), text(u.aleatoric(i)), text(u.total(i)), text(ks.statistic),
                 cell(ks.non_degenerate)});
  }
  emit(out, "bnn_uncertainty", std::move(unc));

  if (samples.cols() > 0) {
    const auto density = learners::bnn_output_density(samples.col(0), kDensityGrid);
    CsvTable dens;
    dens.header = {"p", "density"};
    for (std::size_t g = 0; g < density.grid.size(); ++g) dens.add_row({text(density.grid[g]), text(density.density[g])});
    emit(out, "bnn_density_row0", std::move(dens));
  }

  const auto fd = learners::forest_diagnostics(forest, s.x_test, s.y_test);
  std::vector<std::pair<std::string, std::string>> diag{
      {"bnn_final_elbo", text(bnn.final_elbo)},
      {"bnn_mean_epistemic", text(u.epistemic.size() ? u.epistemic.mean() : 0.0)},
      {"bnn_mean_aleatoric", text(u.aleatoric.size() ? u.aleatoric.mean() : 0.0)},
      {"rf_tree_correlation", text(fd.tree_correlation)},
      {"rf_strength", text(fd.strength)},
      {"rf_error_bound", text(fd.error_bound)},
      {"rf_forest_error", text(fd.forest_error)},
      {"rf_uniform_importance", cell(importance.uniform_fallback)},
      {"gb_stages", cell(static_cast<long long>(gbm.stages.size()))},
      {"gb_skipped_stages", cell(static_cast<long long>(gbm.skipped_stages))},
      {"gb_final_train_loss", text(gbm.loss_trace.empty() ? 0.0 : gbm.loss_trace.back())},
      {"svm_converged", cell(svm.converged)},
      {"svm_iterations", cell(static_cast<long long>(svm.iterations))},
      {"svm_support_vectors", cell(static_cast<long long>(svm.support.size()))},
      {"svm_kkt_residual", text(learners::svm_kkt_residual(svm, s.x_train, s.y_train))},
      {"svm_dual_equality", text(learners::svm_dual_equality(svm, s.y_train))}};
  try {
    diag.emplace_back("svm_margin", text(learners::svm_margin(svm)));
  } catch (const Error&) {
    diag.emplace_back("svm_margin", "");
  }
  emit(out, "train_diagnostics", key_values(diag));
}

std::vector<ResplitOutcome> Pipeline::ensemble(OutputDir& out) {
  const auto names = learner_names();
  std::vector<ResplitOutcome> outcomes;
  CsvTable per_split;
  per_split.header = {"split", "model", "val_error", "test_error", "weight"};
  std::vector<std::vector<double>> test_errors(names.size() + 1);
  std::vector<std::vector<double>> val_errors(names.size() + 1);

  for (int r = 0; r < config_.resplits; ++r) {
    note("[ensemble] re-split " + std::to_string(r + 1) + "/" + std::to_string(config_.resplits));
    const SplitData& s = split_data(r);
    const auto& ms = models(r);
    const auto p_val = predict_all(ms, s.x_val);
    const auto p_test = predict_all(ms, s.x_test);
    const auto risk = ensemble::build_risk_matrix(names, p_val, s.y_val);
    const auto weights = ensemble::optimize_weights(risk, config_.ensemble);

    ResplitOutcome o;
    o.split = r;
    o.weights = weights.w;
    o.path = weights.path;
    o.base_test_error = ensemble::estimate_errors(p_test, s.y_test);
    o.ensemble_test_error = misclassification_rate(ensemble::ensemble_predict(p_test, weights.w), s.y_test);
    const double ens_val = misclassification_rate(ensemble::ensemble_predict(p_val, weights.w), s.y_val);
    for (std::size_t m = 0; m < names.size(); ++m) {
      const auto mi = static_cast<Index>(m);
      per_split.add_row({cell(r), names[m], text(risk.epsilon(mi)), text(o.base_test_error(mi)), text(o.weights(mi))});
      test_errors[m].push_back(o.base_test_error(mi));
      val_errors[m].push_back(risk.epsilon(mi));
    }
    per_split.add_row({cell(r), "Ensemble", text(ens_val), text(o.ensemble_test_error), ""});
    test_errors.back().push_back(o.ensemble_test_error);
    val_errors.back().push_back(ens_val);
    outcomes.push_back(o);

    if (r != 0) continue;
    CsvTable rm;
    rm.header = {"model", "epsilon", "zero_variance"};
    for (const auto& n : names) rm.header.push_back("rho_" + n);
    for (std::size_t m = 0; m < names.size(); ++m) {
      std::vector<std::string> row{names[m], text(risk.epsilon(static_cast<Index>(m))), cell(bool(risk.zero_variance[m]))};
      for (std::size_t k = 0; k < names.size(); ++k) row.push_back(text(risk.rho(static_cast<Index>(m), static_cast<Index>(k))));
      rm.add_row(std::move(row));
    }
    emit(out, "risk_matrix", std::move(rm));

    CsvTable wt;
    wt.header = {"model", "weight"};
    for (std::size_t m = 0; m < names.size(); ++m) wt.add_row({names[m], text(weights.w(static_cast<Index>(m)))});
    emit(out, "ensemble_weights", std::move(wt));

    emit(out, "ensemble_solution",
         key_values({{"path", ensemble::solver_path_name(weights.path)},
                     {"objective", text(weights.objective)},
                     {"lambda", text(weights.lambda)},
                     {"hessian_positive_definite", cell(weights.hessian_positive_definite)},
                     {"affine_fallback", cell(weights.affine_fallback)},
                     {"diversity", text(ensemble::diversity_score(risk.rho))},
                     {"combined_loss", text(ensemble::combined_loss(weights.w, risk, config_.ensemble))}}));

    CsvTable trade;
    trade.header = {"alpha", "beta", "weighted_error", "diversity", "loss"};
    for (const auto& p : ensemble::tradeoff_sweep(weights.w, risk, config_.sweep_alphas, config_.sweep_betas)) {
      trade.add_row({text(p.alpha), text(p.beta), text(p.weighted_error), text(p.diversity), text(p.loss)});
    }
    emit(out, "tradeoff", std::move(trade));
  }
  emit(out, "fig1_splits", std::move(per_split));

  CsvTable fig1;
  fig1.header = {"model", "test_error_mean", "test_error_std", "val_error_mean", "splits"};
  for (std::size_t m = 0; m <= names.size(); ++m) {
    fig1.add_row({m < names.size() ? names[m] : "Ensemble", text(mean_of(test_errors[m])), text(sd_of(test_errors[m])),
                  text(mean_of(val_errors[m])), cell(config_.resplits)});
  }
  emit(out, "fig1", std::move(fig1));
  return outcomes;
}

void Pipeline::stack(OutputDir& out) {
  note("[stack] " + std::to_string(config_.stacking_folds) + "-fold out-of-fold meta-features");
  const SplitData& s = split_data(0);
  const auto names = learner_names();
  const std::vector<learners::LearnerKind> kinds(learners::kAllLearners.begin(), learners::kAllLearners.end());
  const auto meta = stacking::oof_predictions(s.x_train, s.y_train, kinds, config_.seeded_learners(0),
                                              config_.stacking_folds, derive_seed(config_.seed, kStackStream));
  const auto fit = stacking::meta_train(meta.values, s.y_train, config_.meta);
  const auto p_test = predict_all(models(0), s.x_test);
  const Vector stacked = stacking::stack_predict(fit.model, p_test);

  CsvTable fig2;
  fig2.header = {"model", "test_mse", "converged", "converged_epoch", "epochs_run"};
  for (std::size_t m = 0; m < names.size(); ++m) {
    fig2.add_row({names[m], text(brier_score(p_test[m], s.y_test)), "", "", ""});
  }
  fig2.add_row({"Stack", text(brier_score(stacked, s.y_test)), cell(fit.trace.converged), cell(fit.trace.converged_epoch),
                cell(static_cast<long long>(fit.trace.loss.size()))});
  emit(out, "fig2", std::move(fig2));

  CsvTable trace;
  trace.header = {"epoch", "loss", "window_mean"};
  const auto windows = stacking::windowed_means(fit.trace.loss, config_.meta.window);
  for (std::size_t t = 0; t < fit.trace.loss.size(); ++t) {
    trace.add_row({cell(static_cast<long long>(t)), text(fit.trace.loss[t]), t < windows.size() ? text(windows[t]) : ""});
  }
  emit(out, "stacking_trace", std::move(trace));

  CsvTable coef;
  coef.header = {"term", "coefficient"};
  for (std::size_t m = 0; m < names.size(); ++m) coef.add_row({names[m], text(fit.model.coefficients(static_cast<Index>(m)))});
  coef.add_row({"intercept", text(fit.model.intercept)});
  emit(out, "meta_model", std::move(coef));

  CsvTable fills;
  fills.header = {"fold", "model"};
  for (const auto& [fold, column] : meta.base_rate_fills) fills.add_row({cell(fold), names[static_cast<std::size_t>(column)]});
  emit(out, "stacking_base_rate_fills", std::move(fills));
}

void Pipeline::mi(OutputDir& out) {
  note("[mi] permutation tests with " + std::to_string(config_.mi_permutations) + " permutations");
  const auto& d = dataset();
  const SplitData& s = split_data(0);
  const Matrix all_x = s.standardizer.apply(d.features());
  const auto& cfg = config_.mi;

  CsvTable fig3;
  fig3.header = {"row", "n_rows", "i_original", "i_extracted", "gain", "p_value", "significant", "permutations",
                 "original_mode", "extracted_mode", "clamped"};
  auto add = [&](const std::string& label, Index n, const features::GainReport& g) {
    fig3.add_row({label, cell(static_cast<long long>(n)), text(g.i_original), text(g.i_extracted), text(g.delta),
                  text(g.p_value), cell(g.significant), cell(g.permutations), g.original_mode, g.extracted_mode,
                  cell(g.clamped)});
  };
  add("pca_q" + std::to_string(cfg.q), all_x.rows(),
      features::permutation_test(all_x, d.target(), cfg, config_.mi_permutations, derive_seed(config_.seed, kMiStream)));

  // Per-model rows need enough held-out rows for a meaningful histogram estimate.
  constexpr Index kMinRows = 30;
  if (s.x_test.rows() >= kMinRows) {
    const auto names = learner_names();
    const auto p_test = predict_all(models(0), s.x_test);
    for (std::size_t m = 0; m < names.size(); ++m) {
      add(names[m], s.x_test.rows(),
          features::score_permutation_test(s.x_test, p_test[m], s.y_test, cfg, config_.mi_permutations,
                                           derive_seed(config_.seed, kMiStream + 1 + m)));
    }
  } else {
    note("[mi] test split has fewer than 30 rows; per-model rows skipped");
  }
  emit(out, "fig3", std::move(fig3));

  CsvTable per_feature;
  per_feature.header = {"feature", "mi"};
  for (Index j = 0; j < all_x.cols(); ++j) {
    per_feature.add_row({d.feature_names()[static_cast<std::size_t>(j)],
                         text(features::mutual_information(all_x.col(j), d.target(), cfg.bins).value)});
  }
  emit(out, "mi_features", std::move(per_feature));

  const auto pca = features::pca_fit(all_x, cfg.q);
  CsvTable comp;
  comp.header = {"component", "explained_ratio"};
  for (Index c = 0; c < pca.retained(); ++c) comp.add_row({cell(static_cast<long long>(c + 1)), text(pca.explained_ratio(c))});
  emit(out, "pca_components", std::move(comp));
}

std::vector<TuneRun> Pipeline::tune(OutputDir& out) {
  const SplitData& s = split_data(0);
  const auto space = config_.tune_space.search_space();
  const Vector bnn_val = learners::predict(models(0)[0], s.x_val);
  const auto base = config_.seeded_learners(0);
  const auto names = learner_names();

  // Validation Brier score of the weight-optimized ensemble; the BNN is fixed, the other three are refit.
  const hyperopt::Objective objective = [&](const Vector& x) {
    auto cfg = base;
    cfg.gb.shrinkage = x(0);
    cfg.gb.max_depth = static_cast<int>(std::lround(x(1)));
    cfg.rf.n_trees = static_cast<int>(std::lround(x(2)));
    cfg.svm.c = x(3);
    try {
      std::vector<Vector> p_val{bnn_val};
      for (auto kind : {learners::LearnerKind::rf, learners::LearnerKind::gb, learners::LearnerKind::svm}) {
        p_val.push_back(learners::predict(learners::train(kind, s.x_train, s.y_train, cfg), s.x_val));
      }
      const auto risk = ensemble::build_risk_matrix(names, p_val, s.y_val);
      const auto w = ensemble::optimize_weights(risk, config_.ensemble);
      return brier_score(ensemble::ensemble_predict(p_val, w.w), s.y_val);
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  std::vector<TuneRun> runs;
  CsvTable fig4;
  fig4.header = {"seed", "iteration", "phase"};
  for (const auto& dim : space.dims) fig4.header.push_back(dim.name);
  for (const char* c : {"f", "incumbent", "max_ei", "acquisition", "restart", "penalized"}) fig4.header.emplace_back(c);
  CsvTable summary;
  summary.header = {"seed", "best_f", "best_initial", "improvement", "mean_ei_first5", "mean_ei_last5",
                    "restart_events", "incremental_updates", "penalized_points"};
  for (const auto& dim : space.dims) summary.header.push_back("best_" + dim.name);

  for (int k = 0; k < config_.tune_seeds; ++k) {
    note("[tune] seed " + std::to_string(k + 1) + "/" + std::to_string(config_.tune_seeds));
    TuneRun run{k, hyperopt::bo_minimize(objective, space, config_.bo,
                                         derive_seed(config_.seed, kTuneStream + static_cast<std::uint64_t>(k)))};
    double best_initial = std::numeric_limits<double>::infinity();
    std::vector<double> eis;
    for (const auto& step : run.result.trace) {
      std::vector<std::string> row{cell(k), cell(step.iteration), hyperopt::bo_phase_name(step.phase)};
      for (Index j = 0; j < step.x.size(); ++j) row.push_back(text(step.x(j)));
      for (double v : {step.f, step.incumbent, step.max_ei, step.acquisition}) row.push_back(text(v));
      row.push_back(cell(step.restart));
      row.push_back(cell(step.penalized));
      fig4.add_row(std::move(row));
      if (step.phase == hyperopt::BoPhase::initial) {
        best_initial = std::min(best_initial, step.f);
      } else {
        eis.push_back(step.max_ei);
      }
    }
    const std::size_t window = std::min<std::size_t>(5, eis.size());
    const std::vector<double> first(eis.begin(), eis.begin() + static_cast<std::ptrdiff_t>(window));
    const std::vector<double> last(eis.end() - static_cast<std::ptrdiff_t>(window), eis.end());
    std::vector<std::string> row{cell(k), text(run.result.best_f), text(best_initial),
                                 text(best_initial - run.result.best_f), text(mean_of(first)), text(mean_of(last)),
                                 cell(run.result.restart_events), cell(run.result.incremental_updates),
                                 cell(run.result.penalized_points)};
    for (Index j = 0; j < run.result.best_x.size(); ++j) row.push_back(text(run.result.best_x(j)));
    summary.add_row(std::move(row));
    runs.push_back(std::move(run));
  }
  emit(out, "fig4", std::move(fig4));
  emit(out, "tune_summary", std::move(summary));
  return runs;
}

void Pipeline::restart_bench(OutputDir& out) {
  note("[restart-bench] plateau problem, " + std::to_string(config_.restart.trials) + " trials per policy");
  const auto plateau = hyperopt::plateau_problem();
  const auto bench = hyperopt::restart_benchmark(plateau, config_.restart, derive_seed(config_.seed, kRestartStream));
  CsvTable trials;
  trials.header = {"trial", "random_iterations", "adaptive_iterations"};
  for (std::size_t t = 0; t < bench.random_iterations.size(); ++t) {
    trials.add_row({cell(static_cast<long long>(t)), cell(bench.random_iterations[t]), cell(bench.adaptive_iterations[t])});
  }
  emit(out, "restart_trials", std::move(trials));
  emit(out, "restart_summary",
       key_values({{"problem", plateau.name},
                   {"trials", cell(config_.restart.trials)},
                   {"mean_random", text(bench.mean_random)},
                   {"mean_adaptive", text(bench.mean_adaptive)},
                   {"random_capped", cell(bench.random_capped)},
                   {"adaptive_capped", cell(bench.adaptive_capped)},
                   {"welch_t", text(bench.test.t)},
                   {"welch_df", text(bench.test.df)},
                   {"p_adaptive_less", text(bench.test.p_less)},
                   {"p_two_sided", text(bench.test.p_two_sided)}}));

  note("[restart-bench] two-basin convergence probability, " + std::to_string(config_.mc_trials) + " trials");
  const auto basins = hyperopt::two_basin_problem();
  const double q = hyperopt::basin_probability(basins, config_.basin_grid, config_.restart.climb);
  CsvTable mc;
  mc.header = {"restarts", "trials", "failures", "p_bar", "std_error", "q", "geometric", "z"};
  for (int r : config_.mc_restarts) {
    const auto est = hyperopt::mc_convergence_probability(basins, r, config_.mc_trials,
                                                          derive_seed(config_.seed, kMcStream), config_.restart.climb);
    const double geometric = std::pow(1.0 - q, r);
    const double se = std::sqrt(geometric * (1.0 - geometric) / est.trials);
    const double z = se > 0.0 ? (est.p_bar - geometric) / se : (est.p_bar == geometric ? 0.0 : HUGE_VAL);
    mc.add_row({cell(r), cell(est.trials), cell(est.failures), text(est.p_bar), text(est.std_error), text(q),
                text(geometric), text(z)});
  }
  emit(out, "mc_convergence", std::move(mc));
}

ExperimentReport run_all(const ExperimentConfig& config, std::ostream* log) {
  const auto start = std::chrono::steady_clock::now();
  Pipeline pipeline(config, log);
  OutputDir out(config.out_dir);
  ExperimentReport report;
  std::vector<std::string> stages{"ingest", "train", "ensemble", "stack", "mi"};
  try {
    pipeline.ingest(out);
    pipeline.train(out);
    pipeline.ensemble(out);
    pipeline.stack(out);
    pipeline.mi(out);
    if (config.tune_enabled) {
      pipeline.tune(out);
      stages.emplace_back("tune");
    }
    if (config.restart_enabled) {
      pipeline.restart_bench(out);
      stages.emplace_back("restart-bench");
    }
    std::vector<std::string> plots;
    render(out, pipeline.tables(), plots);
  } catch (const std::exception& e) {
    out.write_manifest(false, e.what());
    throw;
  }

  const std::string ini = config_to_ini(config);
  out.write("config.ini", ini);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::string joined;
  for (const auto& s : stages) joined += (joined.empty() ? "" : " ") + s;
  report.metadata = {{"version", kVersion},
                     {"model_format", std::to_string(learners::kModelFormatVersion)},
                     {"seed", std::to_string(config.seed)},
                     {"config_sha256", sha256_hex(ini)},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"compiler", __VERSION__},
                     {"stages", joined},
                     {"wall_seconds", format_double(report.wall_seconds)}};
  std::string meta;
  for (const auto& [k, v] : report.metadata) meta += k + " = " + v + "\n";
  out.write("metadata.txt", meta);
  out.write_manifest(true);

  report.tables = pipeline.tables();
  const auto take = [&](const char* name) {
    const auto it = report.tables.find(name);
    return it == report.tables.end() ? CsvTable{} : it->second;
  };
  report.fig1 = take("fig1");
  report.fig2 = take("fig2");
  report.fig3 = take("fig3");
  report.fig4 = take("fig4");
  return report;
}

std::vector<std::string> render_plots(OutputDir& out) {
  std::map<std::string, CsvTable> tables;
  for (const auto& kind : plot_kinds()) {
    const auto path = out.root() / (kind + ".csv");
    if (!std::filesystem::is_regular_file(path)) continue;
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    tables[kind] = parse_csv(buffer.str());
  }
  if (tables.empty()) {
    throw Error(kModule, "no fig1..fig4 CSV tables in " + out.root().string() + "; run the experiment stages first");
  }
  std::vector<std::string> written;
  render(out, tables, written);
  return written;
}

std::string describe(const ExperimentConfig& config) {
  config.validate();
  const auto learners_cfg = config.seeded_learners(0);
  std::ostringstream o;
  o << "hybridml " << kVersion << " plan\n";
  o << "seed: " << config.seed << "\n";
  o << "data: " << config.data_path.string() << " (missing values: "
    << (config.missing == data::MissingPolicy::median ? "median" : "drop") << ")\n";
  o << "split: train " << cell(config.split.train_fraction) << ", val "
    << cell(config.split.val_fraction) << ", test " << cell(config.split.test_fraction) << "; "
    << config.resplits << " re-split(s), split 0 seed " << config.split_for(0).seed << "\n";
  o << "learners (4):\n";
  o << "  BNN  hidden " << learners_cfg.bnn.hidden << ", epochs " << learners_cfg.bnn.epochs << ", seed "
    << learners_cfg.bnn.seed << "\n";
  o << "  RF   trees " << learners_cfg.rf.n_trees << ", max_depth " << learners_cfg.rf.max_depth << ", seed "
    << learners_cfg.rf.seed << "\n";
  o << "  GB   iterations " << learners_cfg.gb.iterations << ", shrinkage " << cell(learners_cfg.gb.shrinkage)
    << ", seed " << learners_cfg.gb.seed << "\n";
  o << "  SVM  C " << cell(learners_cfg.svm.c) << " (deterministic solver)\n";
  int n = 0;
  std::ostringstream stages;
  stages << "  " << ++n << ". ensemble weights: alpha " << cell(config.ensemble.alpha) << ", beta "
         << cell(config.ensemble.beta) << ", " << (config.ensemble.simplex ? "simplex" : "affine")
         << " constraint -> fig1.csv, fig1.svg\n";
  stages << "  " << ++n << ". stacking: " << config.stacking_folds << " folds, Adam lr "
         << cell(config.meta.learning_rate) << ", " << config.meta.epochs << " epochs -> fig2.csv, fig2.svg\n";
  stages << "  " << ++n << ". feature integration: PCA q=" << config.mi.q << ", " << config.mi.bins << " bins, "
         << config.mi_permutations << " permutations -> fig3.csv, fig3.svg\n";
  if (config.tune_enabled) {
    stages << "  " << ++n << ". tuning: " << config.tune_seeds << " seed(s), budget " << config.bo.budget << ", "
           << hyperopt::restart_kind_name(config.bo.policy.kind) << " restarts -> fig4.csv, fig4.svg\n";
  }
  o << "experiments (" << n << "):\n" << stages.str();
  if (config.restart_enabled) {
    o << "benchmarks (1):\n  restart strategies: " << config.restart.trials << " trials per policy, " << config.mc_trials
      << " Monte-Carlo trials -> restart_summary.csv, mc_convergence.csv\n";
  }
  o << "output: " << config.out_dir.string() << " (CSV tables, SVG plots, models/*.model, MANIFEST)\n";
  return o.str();
}

}  // namespace hybridml::report
