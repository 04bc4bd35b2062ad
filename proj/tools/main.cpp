#include "hybridml/report/experiment.hpp"
#include "hybridml/report/svg.hpp"

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

using hybridml::report::ExperimentConfig;
using hybridml::report::OutputDir;
using hybridml::report::Pipeline;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "Experiment configuration (INI)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "Global seed; overrides [run] seed");
  cmd->add_option("--out", flags.out, "Output directory; overrides [run] out");
}

ExperimentConfig resolve(const CommonFlags& flags) {
  ExperimentConfig c = flags.config.empty() ? ExperimentConfig{} : hybridml::report::load_config(flags.config);
  if (flags.seed) c.seed = *flags.seed;
  if (!flags.out.empty()) c.out_dir = flags.out;
  c.validate();
  return c;
}

// Runs one pipeline stage and writes a MANIFEST covering everything in the output directory.
int run_stage(const CommonFlags& flags, const std::string& name, const std::function<void(Pipeline&, OutputDir&)>& body) {
  const ExperimentConfig config = resolve(flags);
  Pipeline pipeline(config, &std::cerr);
  OutputDir out(config.out_dir);
  try {
    body(pipeline, out);
  } catch (...) {
    out.adopt_existing();
    out.write_manifest(false, "stage " + name + " failed");
    throw;
  }
  out.adopt_existing();
  out.write_manifest(true, "last stage " + name);
  std::cout << name << ": wrote " << out.root().string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid BNN / classical-learner experiments on tabular heart-disease data"};
  app.require_subcommand(1);
  CommonFlags flags;
  int status = 0;

  const auto stage = [&](const char* name, const char* help, std::function<void(Pipeline&, OutputDir&)> body) {
    CLI::App* cmd = app.add_subcommand(name, help);
    add_common(cmd, flags);
    cmd->callback([&flags, &status, name, body = std::move(body)] { status = run_stage(flags, name, body); });
  };

  stage("ingest", "Load the dataset; write summary, chol histogram, split, and standardizer",
        [](Pipeline& p, OutputDir& out) { p.ingest(out); });
  stage("train", "Train BNN, RF, GB, SVM on split 0; write models and diagnostics",
        [](Pipeline& p, OutputDir& out) { p.train(out); });
  stage("ensemble", "Risk matrix and optimal weights over the re-splits (fig1)", [](Pipeline& p, OutputDir& out) {
    const auto outcomes = p.ensemble(out);
    for (const auto& o : outcomes) {
      std::cout << "split " << o.split << ": ensemble test error " << o.ensemble_test_error << ", best base "
                << o.base_test_error.minCoeff() << '\n';
    }
  });
  stage("stack", "Out-of-fold stacking with an Adam-trained linear meta-model (fig2)",
        [](Pipeline& p, OutputDir& out) { p.stack(out); });
  stage("mi", "Mutual-information gain of PCA and model scores with permutation tests (fig3)",
        [](Pipeline& p, OutputDir& out) { p.mi(out); });
  stage("tune", "Bayesian optimization of ensemble hyperparameters (fig4)", [](Pipeline& p, OutputDir& out) {
    for (const auto& run : p.tune(out)) {
      std::cout << "seed " << run.seed_index << ": best validation Brier " << run.result.best_f << ", restarts "
                << run.result.restart_events << '\n';
    }
  });
  stage("restart-bench", "Random vs adaptive restart benchmark and convergence-probability check",
        [](Pipeline& p, OutputDir& out) { p.restart_bench(out); });

  CLI::App* report = app.add_subcommand("report", "Render SVG plots from the fig1..fig4 CSV tables in the output directory");
  add_common(report, flags);
  report->callback([&] {
    const ExperimentConfig config = resolve(flags);
    OutputDir out(config.out_dir);
    for (const auto& name : hybridml::report::render_plots(out)) std::cout << "wrote " << name << '\n';
    out.adopt_existing();
    out.write_manifest(true, "last stage report");
  });

  CLI::App* run_all = app.add_subcommand("run-all", "Run every stage and write tables, plots, models, and MANIFEST");
  add_common(run_all, flags);
  run_all->callback([&] {
    const auto result = hybridml::report::run_all(resolve(flags), &std::cerr);
    for (const auto& row : result.fig1.rows) std::cout << row[0] << " test error " << row[1] << " +/- " << row[2] << '\n';
    std::cout << "wall time " << result.wall_seconds << " s\n";
  });

  CLI::App* describe = app.add_subcommand("describe", "Print the resolved plan without running anything");
  add_common(describe, flags);
  describe->callback([&] { std::cout << hybridml::report::describe(resolve(flags)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const hybridml::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
