// Command-line front end: reproduces the full experiment suite on a synthetic
// or user-supplied panel. See README.md for the subcommand reference.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "macroforest/experiment.hpp"
#include "macroforest/io.hpp"

using namespace macroforest;

namespace {

struct CliOverrides {
  std::string config_file;
  std::string input;
  std::string out;
  std::string forest_file;
  std::string feature = "expectation_12m";
  long long seed = -1;
  int trees = -1;
  int min_parent = -1;
  int horizon = -1;
  int window = -1;
  int threads = -1;
  int countries = -1;
  int months = -1;
  std::string target;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_file, "key = value configuration file");
  cmd->add_option("--input", o.input, "panel CSV (omit to use the synthetic panel)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "master seed");
  cmd->add_option("--trees", o.trees, "benchmark ensemble size");
  cmd->add_option("--min-parent", o.min_parent, "benchmark minimum parent node size");
  cmd->add_option("--horizon", o.horizon, "target horizon in months (0, 6 or 12)")
      ->check(CLI::IsMember({0, 6, 12}));
  cmd->add_option("--window", o.window, "oil/FX change window in months (12 or 3)")
      ->check(CLI::IsMember({12, 3}));
  cmd->add_option("--threads", o.threads, "worker threads for forest training");
  cmd->add_option("--target", o.target, "headline or core");
  cmd->add_option("--countries", o.countries, "synthetic panel: number of countries");
  cmd->add_option("--months", o.months, "synthetic panel: emitted span in months");
}

ExperimentConfig build_config(const CliOverrides& o) {
  ExperimentConfig cfg;
  if (!o.config_file.empty()) load_config_file(cfg, o.config_file);
  if (!o.input.empty()) apply_config_entry(cfg, "input", o.input);
  if (!o.out.empty()) apply_config_entry(cfg, "out", o.out);
  if (o.seed >= 0) apply_config_entry(cfg, "seed", std::to_string(o.seed));
  if (o.trees >= 0) apply_config_entry(cfg, "trees", std::to_string(o.trees));
  if (o.min_parent >= 0) {
    apply_config_entry(cfg, "min_parent", std::to_string(o.min_parent));
  }
  if (o.horizon >= 0) apply_config_entry(cfg, "horizon", std::to_string(o.horizon));
  if (o.window >= 0) apply_config_entry(cfg, "window", std::to_string(o.window));
  if (o.threads >= 0) apply_config_entry(cfg, "threads", std::to_string(o.threads));
  if (o.countries >= 0) apply_config_entry(cfg, "countries", std::to_string(o.countries));
  if (o.months >= 0) apply_config_entry(cfg, "months", std::to_string(o.months));
  if (!o.target.empty()) apply_config_entry(cfg, "target", o.target);
  return cfg;
}

int feature_index(const std::string& name) {
  for (int k = 0; k < kNumFeatures; ++k) {
    if (name == kFeatureNames[k]) return k;
  }
  throw InvalidConfigError("unknown feature '" + name + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"macroforest: regression-forest inflation analytics for macro panels"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string synth_out = "panel.csv";

  auto* synth = app.add_subcommand("synth", "write a synthetic panel CSV");
  add_common_options(synth, o);
  synth->add_option("--file", synth_out, "output CSV path");

  auto* ingest = app.add_subcommand("ingest", "load a panel, assemble the dataset");
  auto* run = app.add_subcommand("run", "full experiment suite");
  auto* table1 = app.add_subcommand("table1", "pruning-grid RMSE comparison");
  auto* horizons = app.add_subcommand("horizons", "6- and 12-month-ahead runs");
  auto* decades = app.add_subcommand("decades", "pre/post decade-split runs");
  auto* core = app.add_subcommand("core", "core-inflation target variant");
  auto* importance = app.add_subcommand("importance", "predictor importance");
  auto* partial = app.add_subcommand("partial", "partial-effect curve");
  for (auto* cmd : {ingest, run, table1, horizons, decades, core, importance, partial}) {
    add_common_options(cmd, o);
  }
  importance->add_option("--forest", o.forest_file, "reuse a saved forest file");
  partial->add_option("--forest", o.forest_file, "reuse a saved forest file");
  partial->add_option("--feature", o.feature, "feature name to sweep");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      ExperimentConfig cfg = build_config(o);
      cfg.validate();
      save_panel(synth_panel(cfg.synth), synth_out);
      std::printf("wrote %s\n", synth_out.c_str());
      return 0;
    }

    Runner runner(build_config(o));
    if (ingest->parsed()) {
      runner.ingest();
      for (const auto& note : runner.bundle().notes) {
        std::printf("%s\n", note.c_str());
      }
    } else if (run->parsed()) {
      runner.run();
    } else if (table1->parsed()) {
      runner.table1();
    } else if (horizons->parsed()) {
      runner.horizons();
    } else if (decades->parsed()) {
      runner.decades();
    } else if (core->parsed()) {
      runner.core();
    } else if (importance->parsed()) {
      runner.importance(o.forest_file);
    } else if (partial->parsed()) {
      runner.partial(feature_index(o.feature), o.forest_file);
    }
    for (const auto& [name, content] : runner.bundle().files) {
      std::printf("wrote %s\n", name.c_str());
    }
    return 0;
  } catch (const StageError& e) {
    std::fprintf(stderr, "macroforest: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "macroforest: error: %s\n", e.what());
    return 1;
  }
}
