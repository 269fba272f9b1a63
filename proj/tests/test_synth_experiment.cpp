#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <set>

#include "macroforest/experiment.hpp"
#include "macroforest/interpret.hpp"
#include "macroforest/io.hpp"

using namespace macroforest;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config(const std::string& out_tag) {
  ExperimentConfig cfg;
  cfg.synth.n_countries = 5;
  cfg.synth.months = 160;
  cfg.p_grid = {10, 30};
  cfg.n_trees_grid = {30};
  cfg.benchmark_trees = 40;
  cfg.oos_reps = 5;
  cfg.seed = 42;
  cfg.out_dir = (fs::temp_directory_path() / out_tag).string();
  return cfg;
}

const ExperimentContext& default_context() {
  static const ExperimentContext ctx = [] {
    ExperimentConfig cfg;
    cfg.seed = 42;
    return prepare_data(cfg);
  }();
  return ctx;
}

double importance_share(const std::string& path, const std::string& feature) {
  const Table t = parse_table("t", read_file(path));
  for (const auto& row : t.rows) {
    if (row[0] == feature) return std::stod(row[2]);
  }
  FAIL("feature not found in ", path);
  return 0;
}

}  // namespace

TEST_CASE("synthetic panel generation is byte-deterministic") {
  SynthSpec spec;
  spec.n_countries = 3;
  spec.months = 120;
  CHECK(panel_to_csv(synth_panel(spec)) == panel_to_csv(synth_panel(spec)));
  SynthSpec other = spec;
  other.seed = 7;
  CHECK(panel_to_csv(synth_panel(spec)) != panel_to_csv(synth_panel(other)));
}

TEST_CASE("default panel lands at the expected observation scale") {
  const Dataset& ds = default_context().dataset();
  CHECK(ds.rows() > 4694);   // within 5% of 4941
  CHECK(ds.rows() < 5188);
  CHECK(ds.x.allFinite());
  CHECK(ds.y.allFinite());
}

TEST_CASE("with kinks and noise off, least squares recovers the coefficients") {
  ExperimentConfig cfg;
  cfg.synth.n_countries = 6;
  cfg.synth.months = 200;
  cfg.synth.gap_kink = 0.0;
  cfg.synth.exp_kink = 0.0;
  cfg.synth.interaction = 0.0;
  cfg.synth.noise_std = 0.0;
  const ExperimentContext ctx = prepare_data(cfg);
  const Dataset& ds = ctx.dataset();

  Eigen::MatrixXd design(ds.rows(), 1 + kNumFeatures);
  design.col(0).setOnes();
  design.rightCols(kNumFeatures) = ds.x;
  const auto fit = ols_fit<double>(design, ds.y);
  const SynthSpec& s = cfg.synth;
  CHECK(fit.coef[0] == doctest::Approx(s.beta0).epsilon(1e-3));
  CHECK(fit.coef[1 + kLaggedInflation] == doctest::Approx(s.beta_lag).epsilon(1e-3));
  CHECK(fit.coef[1 + kExpectation12m] == doctest::Approx(s.beta_exp).epsilon(1e-3));
  CHECK(fit.coef[1 + kOutputGap] == doctest::Approx(s.beta_gap).epsilon(1e-3));
  CHECK(fit.coef[1 + kOilChange] == doctest::Approx(s.beta_oil).epsilon(1e-3));
  CHECK(std::abs(fit.coef[1 + kNeerChange]) < 1e-3);
  CHECK(fit.coef[1 + kGlobalPpi] == doctest::Approx(s.beta_ppi).epsilon(1e-3));
  CHECK(fit.r2 > 0.999);
}

TEST_CASE("repeated-split RMSE is stable for least squares on the default panel") {
  const Dataset& ds = default_context().dataset();
  ExperimentConfig cfg;
  cfg.seed = 42;
  const BenchmarkReport bench = compute_benchmarks(ds, cfg, "baseline");
  CHECK(bench.ols_out_std < 0.1 * bench.ols_out_mean);
  CHECK(bench.ar1_out_std < 0.1 * bench.ar1_out_mean);
  CHECK(bench.ols_in < bench.ar1_in);  // six regressors beat the single lag
}

TEST_CASE("config entries parse, unknown keys are rejected") {
  ExperimentConfig cfg;
  apply_config_entry(cfg, "seed", "123");
  CHECK(cfg.seed == 123);
  CHECK(cfg.synth.seed == 123);  // master seed drives the generator too
  apply_config_entry(cfg, "synth_seed", "9");
  CHECK(cfg.synth.seed == 9);
  apply_config_entry(cfg, "p_grid", "4, 8,15");
  CHECK(cfg.p_grid == std::vector<Index>{4, 8, 15});
  apply_config_entry(cfg, "target", "core");
  CHECK(cfg.target == TargetKind::core);
  apply_config_entry(cfg, "decade_split", "2012-06");
  CHECK(cfg.decade_split == YearMonth{2012, 6});
  CHECK_THROWS_AS(apply_config_entry(cfg, "bogus", "1"), InvalidConfigError);
  CHECK_THROWS_AS(apply_config_entry(cfg, "horizon", "x"), InvalidConfigError);

  const auto path = (fs::temp_directory_path() / "macroforest_cfg.txt").string();
  write_file(path, "# comment\nseed = 5\np_grid = 10,30 # inline\n\ntrees = 25\n");
  ExperimentConfig cfg2;
  load_config_file(cfg2, path);
  CHECK(cfg2.seed == 5);
  CHECK(cfg2.p_grid == std::vector<Index>{10, 30});
  CHECK(cfg2.benchmark_trees == 25);
}

TEST_CASE("an empty bundle emits the manifest alone") {
  ReportBundle bundle;
  bundle.seed = 1;
  bundle.config = "seed = 1\n";
  const auto dir = (fs::temp_directory_path() / "macroforest_empty_bundle").string();
  fs::remove_all(dir);
  emit_report(bundle, dir);
  CHECK(fs::exists(fs::path(dir) / "manifest.txt"));
  Index count = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    (void)entry;
    ++count;
  }
  CHECK(count == 1);
}

TEST_CASE("full run emits every table and figure analogue") {
  ExperimentConfig cfg = small_config("macroforest_run_a");
  fs::remove_all(cfg.out_dir);
  Runner runner(cfg);
  runner.run();

  const std::vector<std::string> required = {
      "summary_stats.csv",  // annex statistics
      "tableA1.csv", "benchmarks.csv",
      "table1.csv",
      "mse_curve.csv", "mse_curve.svg",                        // ensemble-size diagnostic
      "importance_full.csv", "importance_full.svg",            // baseline importance
      "partial_lagged_inflation_full.csv",
      "partial_expectation_12m_full.csv",
      "partial_output_gap_full.csv",
      "partial_oil_change_full.csv",
      "partial_neer_change_full.csv",
      "partial_global_ppi_full.csv",
      "importance_2000s.csv", "importance_2010s.csv",          // decade split
      "partial_expectation_12m_2000s.csv",
      "partial_expectation_12m_2010s.csv",
      "table2.csv", "importance_h12.csv",                      // forecasting horizons
      "partial_surface_h12.csv",
      "importance_p30.csv", "partial_expectation_12m_p30.csv", // shallow trees
      "importance_window3.csv",                                // single-quarter changes
      "importance_core.csv", "partial_expectation_12m_core.csv",
      "slopes.csv", "forest_benchmark.mff",
  };
  const std::string manifest = read_file((fs::path(cfg.out_dir) / "manifest.txt").string());
  for (const auto& name : required) {
    CAPTURE(name);
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));
    CHECK(manifest.find(name) != std::string::npos);
  }
  CHECK_FALSE(fs::exists(fs::path(cfg.out_dir) / "partial_run.marker"));

  // grid cardinality: |p_grid| x |n_trees_grid| rows
  const Table t1 = parse_table("table1.csv",
                               read_file((fs::path(cfg.out_dir) / "table1.csv").string()));
  CHECK(t1.rows.size() == cfg.p_grid.size() * cfg.n_trees_grid.size());

  // core strips the oil signal out of the target
  const double oil_full =
      importance_share((fs::path(cfg.out_dir) / "importance_full.csv").string(),
                       "oil_change");
  const double oil_core =
      importance_share((fs::path(cfg.out_dir) / "importance_core.csv").string(),
                       "oil_change");
  CHECK(oil_core < oil_full);
}

TEST_CASE("reruns with the same configuration reproduce every byte") {
  ExperimentConfig a = small_config("macroforest_run_b1");
  ExperimentConfig b = small_config("macroforest_run_b2");
  fs::remove_all(a.out_dir);
  fs::remove_all(b.out_dir);
  {
    Runner ra(a);
    ra.table1();
    Runner rb(b);
    rb.table1();
  }
  for (const auto& entry : fs::directory_iterator(a.out_dir)) {
    const auto name = entry.path().filename().string();
    CAPTURE(name);
    CHECK(read_file(entry.path().string()) ==
          read_file((fs::path(b.out_dir) / name).string()));
  }
}

TEST_CASE("table1 reloads losslessly") {
  ExperimentConfig cfg = small_config("macroforest_run_c");
  fs::remove_all(cfg.out_dir);
  Runner runner(cfg);
  runner.table1();
  const auto path = (fs::path(cfg.out_dir) / "table1.csv").string();
  const std::string text = read_file(path);
  const Table t = parse_table("table1.csv", text);
  CHECK(t.to_csv() == text);  // shortest-round-trip doubles survive reparsing
  REQUIRE_FALSE(t.rows.empty());
  for (const auto& row : t.rows) {
    const double ml_oob = std::stod(row[3]);
    const double ratio = std::stod(row[7]);
    CHECK(ml_oob > 0);
    CHECK(ratio > 0);
  }
}

TEST_CASE("a failing stage leaves earlier outputs plus a marker") {
  ExperimentConfig cfg = small_config("macroforest_run_fail");
  cfg.n_trees_grid = {0};  // invalid ensemble size surfaces inside the grid stage
  fs::remove_all(cfg.out_dir);
  Runner runner(cfg);
  try {
    runner.table1();
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "forest_grid");
  }
  CHECK(fs::exists(fs::path(cfg.out_dir) / "summary_stats.csv"));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "partial_run.marker"));
  const std::string marker =
      read_file((fs::path(cfg.out_dir) / "partial_run.marker").string());
  CHECK(marker.find("forest_grid") != std::string::npos);
}

TEST_CASE("true expectation component matches the generator's kink") {
  SynthSpec spec;
  CHECK(true_expectation_component(spec, 1.0) == doctest::Approx(spec.beta_exp));
  CHECK(true_expectation_component(spec, 3.0) ==
        doctest::Approx(3.0 * spec.beta_exp + spec.exp_kink));
}
