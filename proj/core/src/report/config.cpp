#include "hybridml/report/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <cmath>
#include <set>
#include <sstream>

namespace hybridml::report {

namespace {

constexpr const char* kModule = "report";
namespace pt = boost::property_tree;

[[noreturn]] void fail(const std::string& key, const std::string& message) {
  const auto dot = key.find('.');
  throw Error(kModule, "[" + key.substr(0, dot) + "] " + key.substr(dot + 1) + ": " + message);
}

// Reads typed values from the tree and remembers which keys were consumed.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  std::string text(const std::string& key, const std::string& fallback) {
    used_.insert(key);
    const auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    return v ? *v : fallback;
  }

  double real(const std::string& key, double fallback) {
    const std::string s = text(key, "");
    if (s.empty()) return fallback;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  long long integer(const std::string& key, long long fallback) {
    const std::string s = text(key, "");
    if (s.empty()) return fallback;
    long long v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  int small(const std::string& key, int fallback) { return static_cast<int>(integer(key, fallback)); }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const std::string s = text(key, "");
    if (s.empty()) return fallback;
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size()) fail(key, "expected an unsigned integer, got '" + s + "'");
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const std::string s = text(key, "");
    if (s.empty()) return fallback;
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    fail(key, "expected true or false, got '" + s + "'");
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
    const std::string s = text(key, "");
    if (s.empty()) return fallback;
    std::vector<double> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      const std::string trimmed = b == std::string::npos ? "" : item.substr(b, e - b + 1);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(trimmed, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (trimmed.empty() || used != trimmed.size()) fail(key, "expected a comma-separated list of numbers");
      out.push_back(v);
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [section, body] : tree_) {
      if (body.empty() && !body.data().empty()) fail(section + ".", "key outside any section");
      for (const auto& [key, value] : body) {
        if (!used_.count(section + "." + key)) fail(section + "." + key, "unknown key");
      }
    }
  }

 private:
  const pt::ptree& tree_;
  std::set<std::string> used_;
};

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) fail(key, message);
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_double(v[i]);
  return s;
}

}  // namespace

hyperopt::SearchSpace TuneSpace::search_space() const {
  hyperopt::SearchSpace s;
  s.dims = {{"gb_shrinkage", gb_shrinkage_min, gb_shrinkage_max, false, false},
            {"gb_depth", static_cast<double>(gb_depth_min), static_cast<double>(gb_depth_max), true, false},
            {"rf_trees", static_cast<double>(rf_trees_min), static_cast<double>(rf_trees_max), true, false},
            {"svm_c", svm_c_min, svm_c_max, false, true}};
  return s;
}

void ExperimentConfig::validate() const {
  const double sum = split.train_fraction + split.val_fraction + split.test_fraction;
  require(split.train_fraction > 0 && split.val_fraction > 0 && split.test_fraction > 0, "split.train",
          "fractions must be positive");
  require(std::abs(sum - 1.0) <= 1e-12, "split.train", "fractions must sum to 1");
  require(resplits >= 1, "split.resplits", "must be at least 1");
  require(learners.bnn.hidden >= 1, "bnn.hidden", "must be at least 1");
  require(learners.bnn.prior_std > 0, "bnn.prior_std", "must be positive");
  require(learners.bnn.learning_rate > 0, "bnn.learning_rate", "must be positive");
  require(learners.bnn.epochs >= 0, "bnn.epochs", "must be nonnegative");
  require(learners.bnn.train_samples >= 1, "bnn.train_samples", "must be at least 1");
  require(learners.bnn.predict_samples >= 100, "bnn.predict_samples", "must be at least 100");
  require(learners.rf.n_trees >= 1, "rf.trees", "must be at least 1");
  require(learners.rf.max_depth >= 1, "rf.max_depth", "must be at least 1");
  require(learners.rf.m_try >= 0 && learners.rf.m_try <= 13, "rf.m_try", "must lie in [0, 13] (0 = sqrt rule)");
  require(learners.rf.min_leaf >= 1, "rf.min_leaf", "must be at least 1");
  require(learners.gb.iterations >= 0, "gb.iterations", "must be nonnegative");
  require(learners.gb.max_depth >= 1, "gb.max_depth", "must be at least 1");
  require(learners.gb.shrinkage > 0 && learners.gb.shrinkage <= 1, "gb.shrinkage", "must lie in (0, 1]");
  require(learners.gb.min_leaf >= 1, "gb.min_leaf", "must be at least 1");
  require(learners.gb.subsample > 0 && learners.gb.subsample <= 1, "gb.subsample", "must lie in (0, 1]");
  require(learners.svm.c > 0, "svm.c", "must be positive");
  require(learners.svm.tolerance > 0, "svm.tolerance", "must be positive");
  require(learners.svm.max_passes >= 1, "svm.max_passes", "must be at least 1");
  require(learners.svm.dual_coefficient > 0, "svm.dual_coefficient", "must be positive");
  require(ensemble.alpha >= 0, "ensemble.alpha", "must be nonnegative");
  require(ensemble.beta >= 0, "ensemble.beta", "must be nonnegative");
  require(!sweep_alphas.empty(), "ensemble.sweep_alphas", "must not be empty");
  require(!sweep_betas.empty(), "ensemble.sweep_betas", "must not be empty");
  require(stacking_folds >= 2, "stacking.folds", "must be at least 2");
  require(meta.learning_rate >= 0, "stacking.learning_rate", "must be nonnegative");
  require(meta.epochs >= 1, "stacking.epochs", "must be at least 1");
  require(meta.window >= 1, "stacking.window", "must be at least 1");
  require(meta.relative_tolerance > 0, "stacking.tolerance", "must be positive");
  require(mi.bins >= 2, "mi.bins", "must be at least 2");
  require(mi.q >= 1 && mi.q <= 13, "mi.components", "must lie in [1, 13]");
  require(mi_permutations >= 99, "mi.permutations", "must be at least 99");
  require(tune_seeds >= 1, "tune.seeds", "must be at least 1");
  require(bo.initial_points >= 2, "tune.initial_points", "must be at least 2");
  require(bo.budget >= bo.initial_points, "tune.budget", "must be at least tune.initial_points");
  require(bo.policy.stall_window >= 1, "tune.stall_window", "must be at least 1");
  require(bo.policy.delta > 0, "tune.delta", "must be positive");
  require(bo.gp.noise_variance >= 0, "tune.noise", "must be nonnegative");
  require(tune_space.gb_shrinkage_min > 0 && tune_space.gb_shrinkage_min < tune_space.gb_shrinkage_max &&
              tune_space.gb_shrinkage_max <= 1,
          "tune.gb_shrinkage_min", "need 0 < min < max <= 1");
  require(tune_space.gb_depth_min >= 1 && tune_space.gb_depth_min < tune_space.gb_depth_max, "tune.gb_depth_min",
          "need 1 <= min < max");
  require(tune_space.rf_trees_min >= 1 && tune_space.rf_trees_min < tune_space.rf_trees_max, "tune.rf_trees_min",
          "need 1 <= min < max");
  require(tune_space.svm_c_min > 0 && tune_space.svm_c_min < tune_space.svm_c_max, "tune.svm_c_min",
          "need 0 < min < max");
  require(restart.trials >= 2, "restart.trials", "must be at least 2");
  require(mc_trials >= 30, "restart.mc_trials", "must be at least 30");
  require(!mc_restarts.empty(), "restart.mc_restarts", "must not be empty");
  for (int r : mc_restarts) require(r >= 1, "restart.mc_restarts", "entries must be at least 1");
  require(basin_grid >= 2, "restart.basin_grid", "must be at least 2");
  require(!out_dir.empty(), "run.out", "must not be empty");
}

learners::LearnerConfigs ExperimentConfig::seeded_learners(int split_index) const {
  learners::LearnerConfigs c = learners;
  const std::uint64_t base = derive_seed(seed, 1000 + static_cast<std::uint64_t>(split_index));
  c.bnn.seed = derive_seed(base, 1);
  c.rf.seed = derive_seed(base, 2);
  c.gb.seed = derive_seed(base, 3);
  return c;
}

data::SplitSpec ExperimentConfig::split_for(int index) const {
  data::SplitSpec s = split;
  s.seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(index));
  return s;
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(kModule, "line " + std::to_string(e.line()) + ": " + e.message());
  }
  Reader r(tree);
  ExperimentConfig c;

  std::filesystem::path data = r.text("data.path", c.data_path.string());
  if (data.is_relative() && !base_dir.empty()) data = base_dir / data;
  c.data_path = data.lexically_normal();
  const std::string missing = r.text("data.missing", "median");
  if (missing == "median") {
    c.missing = data::MissingPolicy::median;
  } else if (missing == "drop") {
    c.missing = data::MissingPolicy::drop;
  } else {
    fail("data.missing", "expected median or drop, got '" + missing + "'");
  }

  c.split.train_fraction = r.real("split.train", c.split.train_fraction);
  c.split.val_fraction = r.real("split.val", c.split.val_fraction);
  c.split.test_fraction = r.real("split.test", c.split.test_fraction);
  c.resplits = r.small("split.resplits", c.resplits);

  auto& b = c.learners.bnn;
  b.hidden = r.small("bnn.hidden", b.hidden);
  b.prior_std = r.real("bnn.prior_std", b.prior_std);
  b.learning_rate = r.real("bnn.learning_rate", b.learning_rate);
  b.epochs = r.small("bnn.epochs", b.epochs);
  b.train_samples = r.small("bnn.train_samples", b.train_samples);
  b.predict_samples = r.small("bnn.predict_samples", b.predict_samples);
  b.init_log_std = r.real("bnn.init_log_std", b.init_log_std);

  auto& f = c.learners.rf;
  f.n_trees = r.small("rf.trees", f.n_trees);
  f.max_depth = r.small("rf.max_depth", f.max_depth);
  f.m_try = r.small("rf.m_try", f.m_try);
  f.min_leaf = r.small("rf.min_leaf", f.min_leaf);

  auto& g = c.learners.gb;
  g.iterations = r.small("gb.iterations", g.iterations);
  g.max_depth = r.small("gb.max_depth", g.max_depth);
  g.shrinkage = r.real("gb.shrinkage", g.shrinkage);
  g.min_leaf = r.small("gb.min_leaf", g.min_leaf);
  g.subsample = r.real("gb.subsample", g.subsample);

  auto& s = c.learners.svm;
  s.c = r.real("svm.c", s.c);
  s.tolerance = r.real("svm.tolerance", s.tolerance);
  s.max_passes = r.small("svm.max_passes", s.max_passes);
  s.dual_coefficient = r.real("svm.dual_coefficient", s.dual_coefficient);

  c.ensemble.alpha = r.real("ensemble.alpha", c.ensemble.alpha);
  c.ensemble.beta = r.real("ensemble.beta", c.ensemble.beta);
  c.ensemble.simplex = r.flag("ensemble.simplex", c.ensemble.simplex);
  c.sweep_alphas = r.reals("ensemble.sweep_alphas", c.sweep_alphas);
  c.sweep_betas = r.reals("ensemble.sweep_betas", c.sweep_betas);

  c.stacking_folds = r.small("stacking.folds", c.stacking_folds);
  c.meta.learning_rate = r.real("stacking.learning_rate", c.meta.learning_rate);
  c.meta.epochs = r.small("stacking.epochs", c.meta.epochs);
  c.meta.half_life = r.real("stacking.half_life", c.meta.half_life);
  c.meta.window = r.small("stacking.window", c.meta.window);
  c.meta.relative_tolerance = r.real("stacking.tolerance", c.meta.relative_tolerance);

  c.mi.bins = r.small("mi.bins", c.mi.bins);
  c.mi.q = r.integer("mi.components", c.mi.q);
  c.mi_permutations = r.small("mi.permutations", c.mi_permutations);
  try {
    c.mi.original_mode = features::reduction_from_name(r.text("mi.original_mode", "max_feature"));
  } catch (const Error& e) {
    fail("mi.original_mode", e.what());
  }
  try {
    c.mi.extracted_mode = features::reduction_from_name(r.text("mi.extracted_mode", "first_component"));
  } catch (const Error& e) {
    fail("mi.extracted_mode", e.what());
  }

  c.tune_enabled = r.flag("tune.enabled", c.tune_enabled);
  c.tune_seeds = r.small("tune.seeds", c.tune_seeds);
  c.bo.budget = r.small("tune.budget", c.bo.budget);
  c.bo.initial_points = r.small("tune.initial_points", c.bo.initial_points);
  try {
    c.bo.policy.kind = hyperopt::restart_kind_from_name(r.text("tune.policy", "adaptive"));
  } catch (const Error& e) {
    fail("tune.policy", e.what());
  }
  c.bo.policy.stall_window = r.small("tune.stall_window", c.bo.policy.stall_window);
  c.bo.policy.delta = r.real("tune.delta", c.bo.policy.delta);
  c.bo.gp.noise_variance = r.real("tune.noise", c.bo.gp.noise_variance);
  auto& ts = c.tune_space;
  ts.gb_shrinkage_min = r.real("tune.gb_shrinkage_min", ts.gb_shrinkage_min);
  ts.gb_shrinkage_max = r.real("tune.gb_shrinkage_max", ts.gb_shrinkage_max);
  ts.gb_depth_min = r.small("tune.gb_depth_min", ts.gb_depth_min);
  ts.gb_depth_max = r.small("tune.gb_depth_max", ts.gb_depth_max);
  ts.rf_trees_min = r.small("tune.rf_trees_min", ts.rf_trees_min);
  ts.rf_trees_max = r.small("tune.rf_trees_max", ts.rf_trees_max);
  ts.svm_c_min = r.real("tune.svm_c_min", ts.svm_c_min);
  ts.svm_c_max = r.real("tune.svm_c_max", ts.svm_c_max);

  c.restart_enabled = r.flag("restart.enabled", c.restart_enabled);
  c.restart.trials = r.small("restart.trials", c.restart.trials);
  c.restart.adaptive.stall_window = r.small("restart.stall_window", c.restart.adaptive.stall_window);
  c.restart.adaptive.delta = r.real("restart.delta", c.restart.adaptive.delta);
  c.mc_trials = r.small("restart.mc_trials", c.mc_trials);
  {
    const auto list = r.reals("restart.mc_restarts", {});
    if (!list.empty()) {
      c.mc_restarts.clear();
      for (double v : list) {
        if (v != std::floor(v)) fail("restart.mc_restarts", "entries must be integers");
        c.mc_restarts.push_back(static_cast<int>(v));
      }
    }
  }
  c.basin_grid = r.small("restart.basin_grid", c.basin_grid);

  c.seed = r.unsigned64("run.seed", c.seed);
  std::filesystem::path out = r.text("run.out", c.out_dir.string());
  if (out.is_relative() && !base_dir.empty()) out = base_dir / out;
  c.out_dir = out.lexically_normal();

  r.reject_unknown();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(kModule, "cannot open config file " + path.string());
  return parse_config(in, path.parent_path());
}

std::string config_to_ini(const ExperimentConfig& c) {
  std::ostringstream o;
  const auto d = [](double v) { return format_double(v); };
  o << "[data]\npath = " << c.data_path.string() << "\nmissing = "
    << (c.missing == data::MissingPolicy::median ? "median" : "drop") << "\n\n";
  o << "[split]\ntrain = " << d(c.split.train_fraction) << "\nval = " << d(c.split.val_fraction)
    << "\ntest = " << d(c.split.test_fraction) << "\nresplits = " << c.resplits << "\n\n";
  const auto& b = c.learners.bnn;
  o << "[bnn]\nhidden = " << b.hidden << "\nprior_std = " << d(b.prior_std) << "\nlearning_rate = "
    << d(b.learning_rate) << "\nepochs = " << b.epochs << "\ntrain_samples = " << b.train_samples
    << "\npredict_samples = " << b.predict_samples << "\ninit_log_std = " << d(b.init_log_std) << "\n\n";
  const auto& f = c.learners.rf;
  o << "[rf]\ntrees = " << f.n_trees << "\nmax_depth = " << f.max_depth << "\nm_try = " << f.m_try
    << "\nmin_leaf = " << f.min_leaf << "\n\n";
  const auto& g = c.learners.gb;
  o << "[gb]\niterations = " << g.iterations << "\nmax_depth = " << g.max_depth << "\nshrinkage = " << d(g.shrinkage)
    << "\nmin_leaf = " << g.min_leaf << "\nsubsample = " << d(g.subsample) << "\n\n";
  const auto& s = c.learners.svm;
  o << "[svm]\nc = " << d(s.c) << "\ntolerance = " << d(s.tolerance) << "\nmax_passes = " << s.max_passes
    << "\ndual_coefficient = " << d(s.dual_coefficient) << "\n\n";
  o << "[ensemble]\nalpha = " << d(c.ensemble.alpha) << "\nbeta = " << d(c.ensemble.beta)
    << "\nsimplex = " << (c.ensemble.simplex ? "true" : "false") << "\nsweep_alphas = " << join(c.sweep_alphas)
    << "\nsweep_betas = " << join(c.sweep_betas) << "\n\n";
  o << "[stacking]\nfolds = " << c.stacking_folds << "\nlearning_rate = " << d(c.meta.learning_rate)
    << "\nepochs = " << c.meta.epochs << "\nhalf_life = " << d(c.meta.half_life) << "\nwindow = " << c.meta.window
    << "\ntolerance = " << d(c.meta.relative_tolerance) << "\n\n";
  o << "[mi]\nbins = " << c.mi.bins << "\ncomponents = " << c.mi.q << "\npermutations = " << c.mi_permutations
    << "\noriginal_mode = " << features::reduction_name(c.mi.original_mode)
    << "\nextracted_mode = " << features::reduction_name(c.mi.extracted_mode) << "\n\n";
  const auto& t = c.tune_space;
  o << "[tune]\nenabled = " << (c.tune_enabled ? "true" : "false") << "\nseeds = " << c.tune_seeds
    << "\nbudget = " << c.bo.budget << "\ninitial_points = " << c.bo.initial_points
    << "\npolicy = " << hyperopt::restart_kind_name(c.bo.policy.kind) << "\nstall_window = " << c.bo.policy.stall_window
    << "\ndelta = " << d(c.bo.policy.delta) << "\nnoise = " << d(c.bo.gp.noise_variance)
    << "\ngb_shrinkage_min = " << d(t.gb_shrinkage_min) << "\ngb_shrinkage_max = " << d(t.gb_shrinkage_max)
    << "\ngb_depth_min = " << t.gb_depth_min << "\ngb_depth_max = " << t.gb_depth_max
    << "\nrf_trees_min = " << t.rf_trees_min << "\nrf_trees_max = " << t.rf_trees_max
    << "\nsvm_c_min = " << d(t.svm_c_min) << "\nsvm_c_max = " << d(t.svm_c_max) << "\n\n";
  std::vector<double> restarts(c.mc_restarts.begin(), c.mc_restarts.end());
  o << "[restart]\nenabled = " << (c.restart_enabled ? "true" : "false") << "\ntrials = " << c.restart.trials
    << "\nstall_window = " << c.restart.adaptive.stall_window << "\ndelta = " << d(c.restart.adaptive.delta)
    << "\nmc_trials = " << c.mc_trials << "\nmc_restarts = " << join(restarts) << "\nbasin_grid = " << c.basin_grid
    << "\n\n";
  o << "[run]\nseed = " << c.seed << "\nout = " << c.out_dir.string() << "\n";
  return o.str();
}

}  // namespace hybridml::report
