#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "macroforest/econobench.hpp"
#include "macroforest/forest.hpp"
#include "macroforest/panel.hpp"
#include "macroforest/synth.hpp"

namespace macroforest {

struct ExperimentConfig {
  std::string input_csv;  // empty -> generate a synthetic panel
  SynthSpec synth;
  TargetKind target = TargetKind::headline;
  int horizon = 0;
  int window = 12;
  std::vector<Index> p_grid = {4, 6, 8, 10, 12, 14, 16, 18, 20, 30, 60, 120};
  std::vector<int> n_trees_grid = {100, 1000};
  YearMonth decade_split{2011, 1};
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  Index benchmark_p = 10;
  int benchmark_trees = 1000;
  int m_try = 2;
  double subsample_fraction = 2.0 / 3.0;
  bool bootstrap = false;
  int oos_reps = 100;
  int threads = 1;  // execution detail; never echoed into outputs
  HpConfig hp;

  void validate() const;
};

// `key = value` lines; '#' starts a comment. Unknown keys are rejected.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);
void load_config_file(ExperimentConfig& cfg, const std::string& path);
std::string config_echo(const ExperimentConfig& cfg);

// Deterministic per-purpose seed derivation.
std::uint64_t label_seed(std::uint64_t seed, const std::string& label);

// ---------------------------------------------------------------------------
// Report bundle
// ---------------------------------------------------------------------------

struct Table {
  std::string name;  // file name, e.g. "table1.csv"
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

Table parse_table(const std::string& name, const std::string& csv_text);

struct ReportBundle {
  std::uint64_t seed = 0;
  std::string config;                      // echo of the run configuration
  std::vector<std::string> notes;          // extra manifest lines
  std::map<std::string, std::string> files;  // name -> bytes

  void add(const std::string& name, std::string content);
  void add_table(const Table& table);
};

// Writes every bundle file plus manifest.txt into out_dir (created if
// missing); overwrites are idempotent. An empty bundle produces the manifest
// alone.
void emit_report(const ReportBundle& bundle, const std::string& out_dir);

// ---------------------------------------------------------------------------
// Pipeline pieces (shared by the CLI runner and the test suites)
// ---------------------------------------------------------------------------

struct ExperimentContext {
  ExperimentConfig cfg;
  RawPanel raw;
  std::vector<Eigen::VectorXd> gaps;
  AssembleReport assembled;  // at cfg.{horizon,target,window}

  const Dataset& dataset() const { return assembled.dataset; }
};

ExperimentContext prepare_data(const ExperimentConfig& cfg);

Dataset assemble_variant(const ExperimentContext& ctx, int horizon,
                         TargetKind target, int window);

// In-sample OLS/AR(1) RMSEs plus the repeated 2/3 - 1/3 out-of-sample runs.
BenchmarkReport compute_benchmarks(const Dataset& ds, const ExperimentConfig& cfg,
                                   const std::string& label);

RandomForest<double> train_benchmark_forest(const Dataset& ds,
                                            const ExperimentConfig& cfg,
                                            const std::string& label,
                                            Index min_parent = -1,
                                            int n_trees = -1);

// Fills bench.rows over the (min_parent, n_trees) grid; forests for the
// smaller tree counts are prefixes of the largest one per grid column.
void run_forest_grid(const Dataset& ds, const ExperimentConfig& cfg,
                     BenchmarkReport& bench);

std::vector<int> default_mse_checkpoints(int n_trees);

// ---------------------------------------------------------------------------
// Runner: one instance per CLI invocation; stages accumulate into a bundle
// that is re-emitted after every completed stage, and a failure leaves a
// partial_run.marker naming the stage that died.
// ---------------------------------------------------------------------------

class Runner {
 public:
  explicit Runner(ExperimentConfig cfg);

  void run();       // every stage
  void ingest();    // data only, plus dataset.csv
  void table1();
  void horizons();
  void decades();
  void core();
  void importance(const std::string& forest_file = "");
  void partial(int feature, const std::string& forest_file = "");

  const ReportBundle& bundle() const { return bundle_; }
  const ExperimentContext& context() const { return ctx_; }

 private:
  template <typename Fn>
  void stage(const std::string& name, Fn&& body);

  void ensure_data();
  void ensure_benchmarks();
  void ensure_benchmark_forest(const std::string& forest_file = "");
  void stage_data();
  void stage_benchmarks();
  void stage_grid();
  void stage_interpret();
  void stage_decades();
  void stage_horizons();
  void stage_robustness();
  void stage_core();

  void add_importance_outputs(const std::string& scope,
                              const RandomForest<double>& forest,
                              const Dataset& ds, bool with_svg = true);
  void add_partial_outputs(const std::string& scope, int feature,
                           const RandomForest<double>& forest, const Dataset& ds,
                           bool with_svg = true);
  void flush_slopes();

  ExperimentConfig cfg_;
  ExperimentContext ctx_;
  bool data_ready_ = false;
  bool benchmarks_ready_ = false;
  bool benchmark_forest_ready_ = false;
  BenchmarkReport bench_;
  RandomForest<double> benchmark_forest_;
  std::vector<std::array<std::string, 3>> slope_rows_;  // scope, feature, slope
  ReportBundle bundle_;
};

}  // namespace macroforest
