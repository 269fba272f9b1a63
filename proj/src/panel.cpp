#include "macroforest/panel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "macroforest/hp_filter.hpp"
#include "macroforest/io.hpp"
#include "macroforest/rng.hpp"
#include "macroforest/stats.hpp"

namespace macroforest {

namespace {

constexpr int kPanelColumnCount = 12;

double parse_cell(const std::string& field, const std::string& context) {
  if (field.empty()) return nan_d();
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') {
    throw CsvFormatError("bad number '" + field + "' at " + context);
  }
  return v;
}

struct RowBuffer {
  std::vector<YearMonth> dates;
  std::vector<std::array<double, 10>> values;  // numeric columns in file order
};

void check_positive(const CountrySeries& c, const Eigen::VectorXd& v,
                    const char* column) {
  for (Index t = 0; t < v.size(); ++t) {
    if (!std::isnan(v[t]) && !(v[t] > 0.0)) {
      throw NonPositiveIndexError(std::string(column) + " <= 0 for " + c.country +
                                  " at " + c.date_at(t).str());
    }
  }
}

void validate_series(const CountrySeries& c) {
  check_positive(c, c.cpi_sa, "cpi_sa");
  check_positive(c, c.core_cpi_sa, "core_cpi_sa");
  check_positive(c, c.real_gdp_sa, "real_gdp_sa");
  check_positive(c, c.brent, "brent");
  check_positive(c, c.neer, "neer");

  // GDP must show up at least every third month across the whole span
  Index run = 0;
  bool seen = false;
  for (Index t = 0; t < c.months(); ++t) {
    if (std::isnan(c.real_gdp_sa[t])) {
      if (++run > 2) {
        throw GdpTooSparseError("real_gdp_sa missing for more than two consecutive "
                                "months for " + c.country + " near " +
                                c.date_at(t).str());
      }
    } else {
      run = 0;
      seen = true;
    }
  }
  if (!seen) {
    throw GdpTooSparseError("real_gdp_sa entirely missing for " + c.country);
  }
}

}  // namespace

RawPanel load_panel(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("cannot open " + csv_path);

  std::string line;
  if (!std::getline(in, line)) throw CsvFormatError("empty file: " + csv_path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  for (int i = 0; i < kPanelColumnCount; ++i) {
    if (static_cast<int>(header.size()) <= i || header[static_cast<std::size_t>(i)] != kPanelColumns[i]) {
      throw MissingColumnError("expected column '" + std::string(kPanelColumns[i]) +
                               "' at position " + std::to_string(i + 1));
    }
  }
  if (static_cast<int>(header.size()) != kPanelColumnCount) {
    throw MissingColumnError("unexpected extra columns in header");
  }

  std::map<std::string, RowBuffer> by_country;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != kPanelColumnCount) {
      throw CsvFormatError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(kPanelColumnCount) + " fields, got " +
                           std::to_string(fields.size()));
    }
    RowBuffer& buf = by_country[fields[0]];
    buf.dates.push_back(parse_year_month(fields[1]));
    std::array<double, 10> row;
    for (int i = 0; i < 10; ++i) {
      row[static_cast<std::size_t>(i)] =
          parse_cell(fields[static_cast<std::size_t>(i + 2)],
                     fields[0] + " line " + std::to_string(line_no));
    }
    buf.values.push_back(row);
  }
  if (by_country.empty()) throw CsvFormatError("no data rows in " + csv_path);

  RawPanel panel;
  for (auto& [name, buf] : by_country) {
    const Index n = static_cast<Index>(buf.dates.size());
    for (Index t = 1; t < n; ++t) {
      const int step = buf.dates[static_cast<std::size_t>(t)].index() -
                       buf.dates[static_cast<std::size_t>(t - 1)].index();
      if (step != 1) {
        throw NonMonotoneDatesError(
            name + ": dates must advance by exactly one month, got " +
            buf.dates[static_cast<std::size_t>(t - 1)].str() + " -> " +
            buf.dates[static_cast<std::size_t>(t)].str());
      }
    }
    CountrySeries c;
    c.country = name;
    c.start = buf.dates.front();
    Eigen::VectorXd* cols[10] = {&c.cpi_sa, &c.core_cpi_sa, &c.real_gdp_sa,
                                 &c.consensus_cy, &c.consensus_ny, &c.brent,
                                 &c.neer, &c.ppi_yoy_us, &c.ppi_yoy_ea,
                                 &c.ppi_yoy_cn};
    for (auto* col : cols) col->resize(n);
    for (Index t = 0; t < n; ++t) {
      for (int i = 0; i < 10; ++i) {
        (*cols[i])[t] = buf.values[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
      }
    }
    validate_series(c);
    panel.countries.push_back(std::move(c));
  }
  return panel;
}

std::string panel_to_csv(const RawPanel& panel) {
  std::ostringstream out;
  for (int i = 0; i < kPanelColumnCount; ++i) {
    out << (i ? "," : "") << kPanelColumns[i];
  }
  out << '\n';
  auto cell = [](double v) { return std::isnan(v) ? std::string() : format_double(v); };
  for (const auto& c : panel.countries) {
    for (Index t = 0; t < c.months(); ++t) {
      out << c.country << ',' << c.date_at(t).str() << ',' << cell(c.cpi_sa[t])
          << ',' << cell(c.core_cpi_sa[t]) << ',' << cell(c.real_gdp_sa[t]) << ','
          << cell(c.consensus_cy[t]) << ',' << cell(c.consensus_ny[t]) << ','
          << cell(c.brent[t]) << ',' << cell(c.neer[t]) << ','
          << cell(c.ppi_yoy_us[t]) << ',' << cell(c.ppi_yoy_ea[t]) << ','
          << cell(c.ppi_yoy_cn[t]) << '\n';
    }
  }
  return out.str();
}

void save_panel(const RawPanel& panel, const std::string& csv_path) {
  write_file(csv_path, panel_to_csv(panel));
}

double quarterly_annualized_inflation(const Eigen::Ref<const Eigen::VectorXd>& index,
                                      Index t) {
  if (t < 3 || t >= index.size()) {
    throw InsufficientHistoryError("quarterly inflation needs months t and t-3 in range");
  }
  const double now = index[t];
  const double base = index[t - 3];
  if (std::isnan(now) || std::isnan(base) || !(now > 0.0) || !(base > 0.0)) {
    return nan_d();
  }
  return (std::pow(now / base, 4.0) - 1.0) * 100.0;
}

double expectation_12m(double cy, double ny, int month) {
  if (month < 1 || month > 12) throw InvalidConfigError("expectation_12m: month must be 1..12");
  if (std::isnan(cy) || std::isnan(ny)) return nan_d();
  if (!(cy > -100.0) || !(ny > -100.0)) {
    throw Error("expectation_12m: rates must exceed -100%");
  }
  // of months t+1..t+12, m stay in the current calendar year
  const double m = 12 - month;
  const double gross = std::pow(1.0 + cy / 100.0, m / 12.0) *
                       std::pow(1.0 + ny / 100.0, (12.0 - m) / 12.0);
  return (gross - 1.0) * 100.0;
}

double cumulative_change(const Eigen::Ref<const Eigen::VectorXd>& series, Index t,
                         int window) {
  if (window < 1) throw InvalidConfigError("cumulative_change: window must be positive");
  if (t < window || t >= series.size()) {
    throw InsufficientHistoryError("cumulative_change needs months t and t-window in range");
  }
  const double now = series[t];
  const double base = series[t - window];
  if (std::isnan(now) || std::isnan(base) || !(now > 0.0) || !(base > 0.0)) {
    return nan_d();
  }
  return (now / base - 1.0) * 100.0;
}

Dataset Dataset::subset(const std::vector<Index>& rows_sorted) const {
  Dataset out;
  out.feature_names = feature_names;
  out.country_names = country_names;
  out.horizon = horizon;
  out.target_kind = target_kind;
  const Index m = static_cast<Index>(rows_sorted.size());
  out.x.resize(m, x.cols());
  out.y.resize(m);
  out.country_id.reserve(rows_sorted.size());
  out.date.reserve(rows_sorted.size());
  for (Index i = 0; i < m; ++i) {
    const Index r = rows_sorted[static_cast<std::size_t>(i)];
    out.x.row(i) = x.row(r);
    out.y[i] = y[r];
    out.country_id.push_back(country_id[static_cast<std::size_t>(r)]);
    out.date.push_back(date[static_cast<std::size_t>(r)]);
  }
  return out;
}

AssembleReport assemble_dataset(const RawPanel& raw,
                                const std::vector<Eigen::VectorXd>& monthly_gap,
                                const AssembleOptions& options) {
  options.validate();
  if (monthly_gap.size() != raw.countries.size()) {
    throw LengthMismatchError("assemble: one gap series per country required");
  }

  AssembleReport report;
  std::vector<Eigen::RowVectorXd> feature_rows;
  std::vector<double> targets;

  for (std::size_t ci = 0; ci < raw.countries.size(); ++ci) {
    const CountrySeries& c = raw.countries[ci];
    const Eigen::VectorXd& gap = monthly_gap[ci];
    if (gap.size() != c.months()) {
      throw LengthMismatchError("assemble: gap series misaligned for " + c.country);
    }
    const Eigen::VectorXd& target_index =
        options.target == TargetKind::core ? c.core_cpi_sa : c.cpi_sa;

    Index dropped = 0;
    const Index last_t = c.months() - 1 - options.horizon;
    for (Index t = 0; t <= last_t; ++t) {
      const Index tm = t + options.horizon;
      double target = nan_d();
      if (tm >= 3) target = quarterly_annualized_inflation(target_index, tm);

      double lag = nan_d();
      if (t >= 6) lag = quarterly_annualized_inflation(target_index, t - 3);

      const double expectation = expectation_12m(
          c.consensus_cy[t], c.consensus_ny[t], c.date_at(t).month);

      double oil = nan_d(), neer = nan_d();
      if (t >= options.window) {
        oil = cumulative_change(c.brent, t, options.window);
        neer = cumulative_change(c.neer, t, options.window);
      }

      const double ppi =
          (c.ppi_yoy_us[t] + c.ppi_yoy_ea[t] + c.ppi_yoy_cn[t]) / 3.0;

      Eigen::RowVectorXd row(kNumFeatures);
      row << lag, expectation, gap[t], oil, neer, ppi;
      if (std::isnan(target) || !row.allFinite()) {
        ++dropped;
        continue;
      }
      feature_rows.push_back(row);
      targets.push_back(target);
      report.dataset.country_id.push_back(static_cast<int>(ci));
      report.dataset.date.push_back(c.date_at(t));
    }
    report.dropped_per_country.emplace_back(c.country, dropped);
    report.total_dropped += dropped;
  }

  if (feature_rows.empty()) {
    throw EmptyDatasetError("assemble: no complete observations survive");
  }

  Dataset& ds = report.dataset;
  ds.horizon = options.horizon;
  ds.target_kind = options.target;
  ds.feature_names.assign(std::begin(kFeatureNames), std::end(kFeatureNames));
  for (const auto& c : raw.countries) ds.country_names.push_back(c.country);
  ds.x.resize(static_cast<Index>(feature_rows.size()), kNumFeatures);
  ds.y.resize(static_cast<Index>(targets.size()));
  for (Index i = 0; i < ds.x.rows(); ++i) {
    ds.x.row(i) = feature_rows[static_cast<std::size_t>(i)];
    ds.y[i] = targets[static_cast<std::size_t>(i)];
  }
  return report;
}

std::vector<Eigen::VectorXd> monthly_output_gaps(const RawPanel& raw,
                                                 const HpConfig& cfg) {
  std::vector<Eigen::VectorXd> gaps;
  gaps.reserve(raw.countries.size());
  for (const auto& c : raw.countries) {
    std::vector<Index> quarter_end;
    for (Index t = 0; t < c.months(); ++t) {
      if (!std::isnan(c.real_gdp_sa[t])) quarter_end.push_back(t);
    }
    for (std::size_t q = 1; q < quarter_end.size(); ++q) {
      if (quarter_end[q] - quarter_end[q - 1] != 3) {
        throw GdpTooSparseError("real_gdp_sa not on a quarterly grid for " +
                                c.country + " near " +
                                c.date_at(quarter_end[q]).str());
      }
    }
    Eigen::VectorXd quarterly(static_cast<Index>(quarter_end.size()));
    for (std::size_t q = 0; q < quarter_end.size(); ++q) {
      quarterly[static_cast<Index>(q)] = c.real_gdp_sa[quarter_end[q]];
    }
    const Eigen::VectorXd gap_q = output_gap<double>(quarterly, cfg);

    Eigen::VectorXd monthly = Eigen::VectorXd::Constant(c.months(), nan_d());
    for (std::size_t q = 0; q < quarter_end.size(); ++q) {
      const Index end = quarter_end[q];
      for (Index t = std::max<Index>(0, end - 2); t <= end; ++t) {
        monthly[t] = gap_q[static_cast<Index>(q)];
      }
    }
    gaps.push_back(std::move(monthly));
  }
  return gaps;
}

std::vector<SummaryRow> summary_stats(const Dataset& ds) {
  if (ds.rows() == 0) throw EmptyDatasetError("summary_stats: empty dataset");
  std::vector<SummaryRow> rows;
  const std::string target_name = ds.target_kind == TargetKind::core
                                      ? "core_cpi_inflation"
                                      : "cpi_inflation";
  rows.push_back({target_name, mean(ds.y), sample_std(ds.y)});
  // annex ordering: global costs, activity, expectations, exchange rate, oil
  const int order[kNumFeatures] = {kGlobalPpi,   kOutputGap, kExpectation12m,
                                   kNeerChange,  kOilChange, kLaggedInflation};
  for (int k : order) {
    rows.push_back({ds.feature_names[static_cast<std::size_t>(k)],
                    mean(ds.x.col(k)), sample_std(ds.x.col(k))});
  }
  return rows;
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double fraction,
                                             std::uint64_t seed) {
  if (ds.rows() < 3) throw EmptyDatasetError("split_train_test: need at least 3 rows");
  const auto [train, test] = split_indices(ds.rows(), fraction, seed);
  return {ds.subset(train), ds.subset(test)};
}

std::pair<Dataset, Dataset> split_by_date(const Dataset& ds, YearMonth cutoff) {
  std::vector<Index> before, after;
  for (Index i = 0; i < ds.rows(); ++i) {
    (ds.date[static_cast<std::size_t>(i)] < cutoff ? before : after).push_back(i);
  }
  return {ds.subset(before), ds.subset(after)};
}

}  // namespace macroforest
