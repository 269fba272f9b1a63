#include "macroforest/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "macroforest/interpret.hpp"
#include "macroforest/io.hpp"
#include "macroforest/svg.hpp"

namespace fs = std::filesystem;

namespace macroforest {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<long long> parse_int_list(const std::string& value) {
  std::vector<long long> out;
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(std::stoll(item));
  }
  return out;
}

double parse_num(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidConfigError("config: bad numeric value '" + value + "' for " + key);
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (horizon != 0 && horizon != 6 && horizon != 12) {
    throw InvalidConfigError("config: horizon must be 0, 6 or 12");
  }
  if (window != 12 && window != 3) {
    throw InvalidConfigError("config: window must be 12 or 3");
  }
  if (p_grid.empty() || n_trees_grid.empty()) {
    throw InvalidConfigError("config: grids must be nonempty");
  }
  if (oos_reps < 1) throw InvalidConfigError("config: oos_reps must be >= 1");
  if (threads < 1) throw InvalidConfigError("config: threads must be >= 1");
  hp.validate();
  if (input_csv.empty()) synth.validate();
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "input") {
    cfg.input_csv = value;
  } else if (key == "target") {
    if (value == "headline") {
      cfg.target = TargetKind::headline;
    } else if (value == "core") {
      cfg.target = TargetKind::core;
    } else {
      throw InvalidConfigError("config: target must be headline or core");
    }
  } else if (key == "horizon") {
    cfg.horizon = static_cast<int>(parse_num(value, key));
  } else if (key == "window") {
    cfg.window = static_cast<int>(parse_num(value, key));
  } else if (key == "p_grid") {
    cfg.p_grid.clear();
    for (long long v : parse_int_list(value)) cfg.p_grid.push_back(v);
  } else if (key == "n_trees_grid") {
    cfg.n_trees_grid.clear();
    for (long long v : parse_int_list(value)) cfg.n_trees_grid.push_back(static_cast<int>(v));
  } else if (key == "decade_split") {
    cfg.decade_split = parse_year_month(value);
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    cfg.synth.seed = cfg.seed;
  } else if (key == "synth_seed") {
    cfg.synth.seed = static_cast<std::uint64_t>(std::stoull(value));
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "countries") {
    cfg.synth.n_countries = static_cast<int>(parse_num(value, key));
  } else if (key == "months") {
    cfg.synth.months = static_cast<int>(parse_num(value, key));
  } else if (key == "lead_in") {
    cfg.synth.lead_in_months = static_cast<int>(parse_num(value, key));
  } else if (key == "noise_std") {
    cfg.synth.noise_std = parse_num(value, key);
  } else if (key == "benchmark_p" || key == "min_parent") {
    cfg.benchmark_p = static_cast<Index>(parse_num(value, key));
  } else if (key == "benchmark_trees" || key == "trees") {
    cfg.benchmark_trees = static_cast<int>(parse_num(value, key));
  } else if (key == "m_try") {
    cfg.m_try = static_cast<int>(parse_num(value, key));
  } else if (key == "subsample_fraction") {
    cfg.subsample_fraction = parse_num(value, key);
  } else if (key == "bootstrap") {
    cfg.bootstrap = parse_num(value, key) != 0;
  } else if (key == "oos_reps") {
    cfg.oos_reps = static_cast<int>(parse_num(value, key));
  } else if (key == "threads") {
    cfg.threads = static_cast<int>(parse_num(value, key));
  } else if (key == "hp_lambda") {
    cfg.hp.lambda = parse_num(value, key);
    cfg.synth.hp.lambda = cfg.hp.lambda;
  } else if (key == "hp_min_window") {
    cfg.hp.min_window = static_cast<Index>(parse_num(value, key));
    cfg.synth.hp.min_window = cfg.hp.min_window;
  } else {
    throw InvalidConfigError("config: unknown key '" + key + "'");
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfigError("config: line " + std::to_string(line_no) +
                               " is not 'key = value'");
    }
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "input = " << cfg.input_csv << '\n';
  out << "target = " << target_kind_name(cfg.target) << '\n';
  out << "horizon = " << cfg.horizon << '\n';
  out << "window = " << cfg.window << '\n';
  out << "p_grid = ";
  for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
    out << (i ? "," : "") << cfg.p_grid[i];
  }
  out << '\n';
  out << "n_trees_grid = ";
  for (std::size_t i = 0; i < cfg.n_trees_grid.size(); ++i) {
    out << (i ? "," : "") << cfg.n_trees_grid[i];
  }
  out << '\n';
  out << "decade_split = " << cfg.decade_split.str() << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << "benchmark_p = " << cfg.benchmark_p << '\n';
  out << "benchmark_trees = " << cfg.benchmark_trees << '\n';
  out << "m_try = " << cfg.m_try << '\n';
  out << "subsample_fraction = " << format_double(cfg.subsample_fraction) << '\n';
  out << "bootstrap = " << (cfg.bootstrap ? 1 : 0) << '\n';
  out << "oos_reps = " << cfg.oos_reps << '\n';
  out << "hp_lambda = " << format_double(cfg.hp.lambda) << '\n';
  out << "hp_min_window = " << cfg.hp.min_window << '\n';
  if (cfg.input_csv.empty()) {
    out << "countries = " << cfg.synth.n_countries << '\n';
    out << "months = " << cfg.synth.months << '\n';
    out << "lead_in = " << cfg.synth.lead_in_months << '\n';
    out << "noise_std = " << format_double(cfg.synth.noise_std) << '\n';
    out << "synth_seed = " << cfg.synth.seed << '\n';
  }
  return out.str();
}

std::uint64_t label_seed(std::uint64_t seed, const std::string& label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return substream_seed(seed, h);
}

// ---------------------------------------------------------------------------
// Tables and bundle
// ---------------------------------------------------------------------------

std::string Table::to_csv() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

Table parse_table(const std::string& name, const std::string& csv_text) {
  Table table;
  table.name = name;
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw CsvFormatError("empty table " + name);
  table.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    table.rows.push_back(split_csv_line(line));
  }
  return table;
}

void ReportBundle::add(const std::string& name, std::string content) {
  files[name] = std::move(content);
}

void ReportBundle::add_table(const Table& table) { add(table.name, table.to_csv()); }

void emit_report(const ReportBundle& bundle, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

  for (const auto& [name, content] : bundle.files) {
    write_file((fs::path(out_dir) / name).string(), content);
  }

  std::ostringstream manifest;
  manifest << "macroforest run manifest\n";
  manifest << "seed = " << bundle.seed << '\n';
  manifest << "config:\n" << bundle.config;
  for (const auto& note : bundle.notes) manifest << note << '\n';
  manifest << "files:\n";
  for (const auto& [name, content] : bundle.files) {
    manifest << name << '\n';
  }
  write_file((fs::path(out_dir) / "manifest.txt").string(), manifest.str());
}

// ---------------------------------------------------------------------------
// Pipeline pieces
// ---------------------------------------------------------------------------

ExperimentContext prepare_data(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentContext ctx;
  ctx.cfg = cfg;
  ctx.raw = cfg.input_csv.empty() ? synth_panel(cfg.synth) : load_panel(cfg.input_csv);
  ctx.gaps = monthly_output_gaps(ctx.raw, cfg.hp);
  ctx.assembled = assemble_dataset(ctx.raw, ctx.gaps,
                                   {cfg.horizon, cfg.target, cfg.window});
  return ctx;
}

Dataset assemble_variant(const ExperimentContext& ctx, int horizon,
                         TargetKind target, int window) {
  return assemble_dataset(ctx.raw, ctx.gaps, {horizon, target, window}).dataset;
}

namespace {

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

Eigen::VectorXd ols_predictor(const Eigen::MatrixXd& xtr, const Eigen::VectorXd& ytr,
                              const Eigen::MatrixXd& xte) {
  const OlsFit<double> fit = ols_fit<double>(with_intercept(xtr), ytr);
  return with_intercept(xte) * fit.coef;
}

Eigen::VectorXd ar1_predictor(const Eigen::MatrixXd& xtr, const Eigen::VectorXd& ytr,
                              const Eigen::MatrixXd& xte) {
  const OlsFit<double> fit =
      ar1_fit<double>(ytr, xtr.col(kLaggedInflation));
  return (fit.coef[0] + fit.coef[1] * xte.col(kLaggedInflation).array()).matrix();
}

}  // namespace

BenchmarkReport compute_benchmarks(const Dataset& ds, const ExperimentConfig& cfg,
                                   const std::string& label) {
  BenchmarkReport bench;
  const Eigen::MatrixXd design = with_intercept(ds.x);
  const OlsFit<double> ols = ols_fit<double>(design, ds.y);
  bench.ols_in = rmse<double>(design * ols.coef, ds.y);

  const OlsFit<double> ar1 = ar1_fit<double>(ds.y, ds.x.col(kLaggedInflation));
  const Eigen::VectorXd ar1_pred =
      (ar1.coef[0] + ar1.coef[1] * ds.x.col(kLaggedInflation).array()).matrix();
  bench.ar1_in = rmse<double>(ar1_pred, ds.y);

  const auto ols_oos = oos_protocol<double>(
      ols_predictor, ds.x, ds.y, cfg.oos_reps, 2.0 / 3.0,
      label_seed(cfg.seed, label + "/oos_ols"));
  bench.ols_out_mean = ols_oos.mean;
  bench.ols_out_std = ols_oos.stddev;

  const auto ar1_oos = oos_protocol<double>(
      ar1_predictor, ds.x, ds.y, cfg.oos_reps, 2.0 / 3.0,
      label_seed(cfg.seed, label + "/oos_ar1"));
  bench.ar1_out_mean = ar1_oos.mean;
  bench.ar1_out_std = ar1_oos.stddev;
  return bench;
}

RandomForest<double> train_benchmark_forest(const Dataset& ds,
                                            const ExperimentConfig& cfg,
                                            const std::string& label,
                                            Index min_parent, int n_trees) {
  ForestConfig fc;
  fc.n_trees = n_trees > 0 ? n_trees : cfg.benchmark_trees;
  fc.min_parent = min_parent > 0 ? min_parent : cfg.benchmark_p;
  fc.m_try = cfg.m_try;
  fc.subsample_fraction = cfg.subsample_fraction;
  fc.bootstrap = cfg.bootstrap;
  fc.seed = label_seed(cfg.seed, label);
  return train_forest<double>(ds.x, ds.y, fc, cfg.threads, ds.feature_names);
}

void run_forest_grid(const Dataset& ds, const ExperimentConfig& cfg,
                     BenchmarkReport& bench) {
  const int n_max = *std::max_element(cfg.n_trees_grid.begin(), cfg.n_trees_grid.end());
  bench.rows.clear();
  for (Index p : cfg.p_grid) {
    const RandomForest<double> forest = train_benchmark_forest(
        ds, cfg, "grid_p" + std::to_string(p), p, n_max);
    for (int n : cfg.n_trees_grid) {
      const double ml_in = insample_rmse(forest, ds.x, ds.y, n);
      const double ml_oob = oob_rmse(forest, ds.x, ds.y, n);
      bench.rows.push_back(make_ratio_row(p, n, ml_in, ml_oob, bench));
    }
  }
}

std::vector<int> default_mse_checkpoints(int n_trees) {
  static constexpr int kBase[] = {1,  2,   3,   5,   7,   10,  15,  20,  30,
                                  50, 70,  100, 150, 200, 300, 500, 700, 1000};
  std::vector<int> out;
  for (int c : kBase) {
    if (c <= n_trees) out.push_back(c);
  }
  if (out.empty() || out.back() != n_trees) out.push_back(n_trees);
  return out;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

Runner::Runner(ExperimentConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  bundle_.seed = cfg_.seed;
  bundle_.config = config_echo(cfg_);
}

template <typename Fn>
void Runner::stage(const std::string& name, Fn&& body) {
  try {
    body();
  } catch (const std::exception& e) {
    emit_report(bundle_, cfg_.out_dir);
    write_file((fs::path(cfg_.out_dir) / "partial_run.marker").string(),
               "failed during stage: " + name + "\n");
    throw StageError(name, e.what());
  }
  emit_report(bundle_, cfg_.out_dir);
}

void Runner::ensure_data() {
  if (data_ready_) return;
  stage("data", [&] { stage_data(); });
  data_ready_ = true;
}

void Runner::ensure_benchmarks() {
  ensure_data();
  if (benchmarks_ready_) return;
  stage("benchmarks", [&] { stage_benchmarks(); });
  benchmarks_ready_ = true;
}

void Runner::ensure_benchmark_forest(const std::string& forest_file) {
  ensure_data();
  if (benchmark_forest_ready_) return;
  stage("benchmark_forest", [&] {
    if (forest_file.empty()) {
      benchmark_forest_ = train_benchmark_forest(ctx_.dataset(), cfg_, "benchmark");
    } else {
      benchmark_forest_ = load_forest<double>(forest_file);
      if (benchmark_forest_.n_rows != ctx_.dataset().rows()) {
        throw LengthMismatchError("loaded forest was trained on a different dataset");
      }
    }
  });
  benchmark_forest_ready_ = true;
}

void Runner::stage_data() {
  ctx_ = prepare_data(cfg_);
  const Dataset& ds = ctx_.dataset();

  Table stats{"summary_stats.csv", {"variable", "mean", "std"}, {}};
  for (const auto& row : summary_stats(ds)) {
    stats.rows.push_back({row.variable, format_double(row.mean),
                          format_double(row.stddev)});
  }
  bundle_.add_table(stats);

  bundle_.notes.push_back("rows = " + std::to_string(ds.rows()));
  bundle_.notes.push_back("dropped = " + std::to_string(ctx_.assembled.total_dropped));
}

void Runner::stage_benchmarks() {
  const Dataset& ds = ctx_.dataset();
  bench_ = compute_benchmarks(ds, cfg_, "baseline");

  const Eigen::MatrixXd design = with_intercept(ds.x);
  const OlsFit<double> ols = ols_fit<double>(design, ds.y);
  const OlsFit<double> ar1 = ar1_fit<double>(ds.y, ds.x.col(kLaggedInflation));

  Table a1{"tableA1.csv",
           {"model", "term", "coefficient", "std_error", "t_stat"},
           {}};
  auto add_fit = [&](const std::string& model, const OlsFit<double>& fit,
                     const std::vector<std::string>& terms) {
    for (Index i = 0; i < fit.coef.size(); ++i) {
      a1.rows.push_back({model, terms[static_cast<std::size_t>(i)],
                         format_double(fit.coef[i]), format_double(fit.se[i]),
                         format_double(fit.t[i])});
    }
    a1.rows.push_back({model, "r2", format_double(fit.r2), "", ""});
    a1.rows.push_back({model, "f_stat", format_double(fit.f_stat), "", ""});
    a1.rows.push_back({model, "n_obs", std::to_string(fit.n), "", ""});
  };
  add_fit("ar1", ar1, {"constant", "lagged_inflation"});
  std::vector<std::string> terms = {"constant"};
  for (const auto& f : ds.feature_names) terms.push_back(f);
  add_fit("ols", ols, terms);
  bundle_.add_table(a1);

  Table bench_table{"benchmarks.csv",
                    {"model", "in_sample_rmse", "oos_rmse_mean", "oos_rmse_std"},
                    {}};
  bench_table.rows.push_back({"ar1", format_double(bench_.ar1_in),
                              format_double(bench_.ar1_out_mean),
                              format_double(bench_.ar1_out_std)});
  bench_table.rows.push_back({"ols", format_double(bench_.ols_in),
                              format_double(bench_.ols_out_mean),
                              format_double(bench_.ols_out_std)});
  bundle_.add_table(bench_table);
}

void Runner::stage_grid() {
  const Dataset& ds = ctx_.dataset();
  run_forest_grid(ds, cfg_, bench_);

  Table t1{"table1.csv",
           {"p", "n_trees", "ml_in", "ml_oob", "ratio_ar1_in", "ratio_ols_in",
            "ratio_ar1_out", "ratio_ols_out"},
           {}};
  for (const auto& row : bench_.rows) {
    t1.rows.push_back({std::to_string(row.min_parent), std::to_string(row.n_trees),
                       format_double(row.ml_in), format_double(row.ml_oob),
                       format_double(row.ratio_ar1_in), format_double(row.ratio_ols_in),
                       format_double(row.ratio_ar1_out), format_double(row.ratio_ols_out)});
  }
  bundle_.add_table(t1);
}

void Runner::add_importance_outputs(const std::string& scope,
                                    const RandomForest<double>& forest,
                                    const Dataset& ds, bool with_svg) {
  const ImportanceVector<double> imp = impurity_importance(forest, ds.x, ds.y);
  Table table{"importance_" + scope + ".csv", {"feature", "raw", "normalized"}, {}};
  for (Index k = 0; k < imp.raw.size(); ++k) {
    table.rows.push_back({ds.feature_names[static_cast<std::size_t>(k)],
                          format_double(imp.raw[k]),
                          format_double(imp.normalized[k])});
  }
  bundle_.add_table(table);
  if (with_svg) {
    std::vector<double> values(imp.normalized.data(),
                               imp.normalized.data() + imp.normalized.size());
    bundle_.add("importance_" + scope + ".svg",
                svg_bar_plot(ds.feature_names, values,
                             "Predictor importance (" + scope + ")"));
  }
}

void Runner::add_partial_outputs(const std::string& scope, int feature,
                                 const RandomForest<double>& forest,
                                 const Dataset& ds, bool with_svg) {
  const PartialEffectCurve<double> curve = partial_effect(forest, ds.x, feature);
  const std::string& fname = ds.feature_names[static_cast<std::size_t>(feature)];
  Table table{"partial_" + fname + "_" + scope + ".csv", {"grid", "prediction"}, {}};
  for (Index i = 0; i < curve.grid.size(); ++i) {
    table.rows.push_back({format_double(curve.grid[i]),
                          format_double(curve.prediction[i])});
  }
  bundle_.add_table(table);
  if (with_svg) {
    std::vector<double> gx(curve.grid.data(), curve.grid.data() + curve.grid.size());
    std::vector<double> gy(curve.prediction.data(),
                           curve.prediction.data() + curve.prediction.size());
    bundle_.add("partial_" + fname + "_" + scope + ".svg",
                svg_line_plot(gx, gy, "Partial effect of " + fname + " (" + scope + ")",
                              fname, "predicted inflation"));
  }
  slope_rows_.push_back({scope, fname, format_double(average_slope(curve))});
  flush_slopes();
}

void Runner::flush_slopes() {
  Table slopes{"slopes.csv", {"scope", "feature", "slope"}, {}};
  for (const auto& row : slope_rows_) {
    slopes.rows.push_back({row[0], row[1], row[2]});
  }
  bundle_.add_table(slopes);
}

void Runner::stage_interpret() {
  const Dataset& ds = ctx_.dataset();
  const auto checkpoints = default_mse_checkpoints(benchmark_forest_.n_trees());
  const auto curve = mse_curve(benchmark_forest_, ds.x, ds.y, checkpoints);
  Table mse{"mse_curve.csv", {"n_trees", "oob_mse"}, {}};
  std::vector<double> cx, cy;
  for (const auto& [count, value] : curve) {
    mse.rows.push_back({std::to_string(count), format_double(value)});
    cx.push_back(count);
    cy.push_back(value);
  }
  bundle_.add_table(mse);
  bundle_.add("mse_curve.svg",
              svg_line_plot(cx, cy, "Out-of-bag MSE vs ensemble size", "trees",
                            "OOB MSE"));

  add_importance_outputs("full", benchmark_forest_, ds);
  for (int k = 0; k < kNumFeatures; ++k) {
    add_partial_outputs("full", k, benchmark_forest_, ds);
  }
}

void Runner::stage_decades() {
  const auto [pre, post] = split_by_date(ctx_.dataset(), cfg_.decade_split);
  if (pre.rows() < 50 || post.rows() < 50) {
    throw EmptyDatasetError("decade split leaves too few rows on one side");
  }
  const RandomForest<double> f_pre =
      train_benchmark_forest(pre, cfg_, "decade_pre");
  const RandomForest<double> f_post =
      train_benchmark_forest(post, cfg_, "decade_post");
  add_importance_outputs("2000s", f_pre, pre);
  add_importance_outputs("2010s", f_post, post);
  add_partial_outputs("2000s", kExpectation12m, f_pre, pre);
  add_partial_outputs("2010s", kExpectation12m, f_post, post);
}

void Runner::stage_horizons() {
  Table t2{"table2.csv",
           {"horizon", "ml_in", "ml_oob", "ratio_ar1_out", "ratio_ols_out"},
           {}};
  for (int h : {6, 12}) {
    const std::string label = "h" + std::to_string(h);
    const Dataset ds = assemble_variant(ctx_, h, cfg_.target, cfg_.window);
    const BenchmarkReport bench = compute_benchmarks(ds, cfg_, label);
    const RandomForest<double> forest = train_benchmark_forest(ds, cfg_, label);
    const double ml_in = insample_rmse(forest, ds.x, ds.y);
    const double ml_oob = oob_rmse(forest, ds.x, ds.y);
    t2.rows.push_back({std::to_string(h), format_double(ml_in),
                       format_double(ml_oob),
                       format_double(safe_ratio(ml_oob, bench.ar1_out_mean)),
                       format_double(safe_ratio(ml_oob, bench.ols_out_mean))});
    if (h == 12) {
      add_importance_outputs("h12", forest, ds);
      const PartialSurface<double> surf =
          partial_surface(forest, ds.x, kExpectation12m, kGlobalPpi);
      Table st{"partial_surface_h12.csv",
               {"expectation_12m", "global_ppi", "prediction"},
               {}};
      for (Index i = 0; i < surf.grid_a.size(); ++i) {
        for (Index j = 0; j < surf.grid_b.size(); ++j) {
          st.rows.push_back({format_double(surf.grid_a[i]),
                             format_double(surf.grid_b[j]),
                             format_double(surf.prediction(i, j))});
        }
      }
      bundle_.add_table(st);
    }
  }
  bundle_.add_table(t2);
}

void Runner::stage_robustness() {
  const Dataset& ds = ctx_.dataset();
  const Index p_shallow = 3 * cfg_.benchmark_p;
  const std::string scope = "p" + std::to_string(p_shallow);
  const RandomForest<double> shallow =
      train_benchmark_forest(ds, cfg_, scope, p_shallow);
  add_importance_outputs(scope, shallow, ds);
  add_partial_outputs(scope, kExpectation12m, shallow, ds);

  // single-quarter oil / exchange-rate variation
  const Dataset ds_w3 = assemble_variant(ctx_, cfg_.horizon, cfg_.target, 3);
  const RandomForest<double> f_w3 = train_benchmark_forest(ds_w3, cfg_, "window3");
  add_importance_outputs("window3", f_w3, ds_w3, /*with_svg=*/false);
}

void Runner::stage_core() {
  const Dataset ds = assemble_variant(ctx_, cfg_.horizon, TargetKind::core,
                                      cfg_.window);
  const RandomForest<double> forest = train_benchmark_forest(ds, cfg_, "core");
  add_importance_outputs("core", forest, ds);
  add_partial_outputs("core", kExpectation12m, forest, ds);
}

void Runner::run() {
  ensure_data();
  ensure_benchmarks();
  stage("forest_grid", [&] { stage_grid(); });
  ensure_benchmark_forest();
  stage("interpret", [&] { stage_interpret(); });
  stage("decades", [&] { stage_decades(); });
  stage("horizons", [&] { stage_horizons(); });
  stage("robustness", [&] { stage_robustness(); });
  stage("core", [&] { stage_core(); });
  // the reloadable model is by far the largest artifact; written once, last
  stage("save_forest", [&] {
    bundle_.add("forest_benchmark.mff", serialize_forest(benchmark_forest_));
  });

  std::error_code ec;
  fs::remove(fs::path(cfg_.out_dir) / "partial_run.marker", ec);
}

void Runner::ingest() {
  ensure_data();
  stage("ingest", [&] {
    const Dataset& ds = ctx_.dataset();
    Table data{"dataset.csv", {"country", "date"}, {}};
    for (const auto& f : ds.feature_names) data.header.push_back(f);
    data.header.push_back("target");
    for (Index i = 0; i < ds.rows(); ++i) {
      std::vector<std::string> row;
      row.push_back(ds.country_names[static_cast<std::size_t>(
          ds.country_id[static_cast<std::size_t>(i)])]);
      row.push_back(ds.date[static_cast<std::size_t>(i)].str());
      for (Index k = 0; k < ds.x.cols(); ++k) {
        row.push_back(format_double(ds.x(i, k)));
      }
      row.push_back(format_double(ds.y[i]));
      data.rows.push_back(std::move(row));
    }
    bundle_.add_table(data);
  });
}

void Runner::table1() {
  ensure_benchmarks();
  stage("forest_grid", [&] { stage_grid(); });
}

void Runner::horizons() {
  ensure_benchmarks();
  stage("horizons", [&] { stage_horizons(); });
}

void Runner::decades() {
  ensure_data();
  stage("decades", [&] { stage_decades(); });
}

void Runner::core() {
  ensure_data();
  stage("core", [&] { stage_core(); });
}

void Runner::importance(const std::string& forest_file) {
  ensure_benchmark_forest(forest_file);
  stage("importance", [&] {
    add_importance_outputs("full", benchmark_forest_, ctx_.dataset());
  });
}

void Runner::partial(int feature, const std::string& forest_file) {
  if (feature < 0 || feature >= kNumFeatures) {
    throw InvalidConfigError("partial: feature index out of range");
  }
  ensure_benchmark_forest(forest_file);
  stage("partial", [&] {
    add_partial_outputs("full", feature, benchmark_forest_, ctx_.dataset());
  });
}

}  // namespace macroforest
