#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/dates.hpp"
#include "macroforest/errors.hpp"

namespace macroforest {

// Expected input header, in order.
inline constexpr const char* kPanelColumns[] = {
    "country", "date",         "cpi_sa",      "core_cpi_sa", "real_gdp_sa",
    "consensus_cy", "consensus_ny", "brent",   "neer",
    "ppi_yoy_us",   "ppi_yoy_ea",   "ppi_yoy_cn",
};

// One country's monthly series; contiguous months from `start`, NaN = missing.
struct CountrySeries {
  std::string country;
  YearMonth start;
  Eigen::VectorXd cpi_sa;
  Eigen::VectorXd core_cpi_sa;
  Eigen::VectorXd real_gdp_sa;  // populated only in quarter-end months
  Eigen::VectorXd consensus_cy;
  Eigen::VectorXd consensus_ny;
  Eigen::VectorXd brent;
  Eigen::VectorXd neer;
  Eigen::VectorXd ppi_yoy_us;
  Eigen::VectorXd ppi_yoy_ea;
  Eigen::VectorXd ppi_yoy_cn;

  Index months() const { return cpi_sa.size(); }
  YearMonth date_at(Index t) const { return start.plus_months(static_cast<int>(t)); }
};

struct RawPanel {
  std::vector<CountrySeries> countries;  // sorted by country name
};

RawPanel load_panel(const std::string& csv_path);
void save_panel(const RawPanel& panel, const std::string& csv_path);
std::string panel_to_csv(const RawPanel& panel);

// ((I_t / I_{t-3})^4 - 1) * 100; NaN propagates from missing inputs.
double quarterly_annualized_inflation(const Eigen::Ref<const Eigen::VectorXd>& index,
                                      Index t);

// Blend of current- and next-calendar-year forecasts with geometric weights
// from the number of the next 12 months that fall in each year (the current
// month itself excluded).
double expectation_12m(double cy, double ny, int month);

// (S_t / S_{t-window} - 1) * 100
double cumulative_change(const Eigen::Ref<const Eigen::VectorXd>& series, Index t,
                         int window);

enum class TargetKind { headline, core };

inline const char* target_kind_name(TargetKind k) {
  return k == TargetKind::headline ? "headline" : "core";
}

struct AssembleOptions {
  int horizon = 0;       // months ahead the target is measured (0, 6 or 12)
  TargetKind target = TargetKind::headline;
  int window = 12;       // oil / exchange-rate change window (12 or 3)

  void validate() const {
    if (horizon != 0 && horizon != 6 && horizon != 12) {
      throw InvalidConfigError("assemble: horizon must be 0, 6 or 12");
    }
    if (window != 12 && window != 3) {
      throw InvalidConfigError("assemble: window must be 12 or 3");
    }
  }
};

// Aligned observations: row i of X is the six-feature vector for
// (country_id[i], date[i]), y[i] the matching target.
struct Dataset {
  Eigen::MatrixXd x;  // n x 6, column order = kFeatureNames
  Eigen::VectorXd y;
  std::vector<std::string> feature_names;
  std::vector<int> country_id;
  std::vector<std::string> country_names;
  std::vector<YearMonth> date;
  int horizon = 0;
  TargetKind target_kind = TargetKind::headline;

  Index rows() const { return x.rows(); }
  Dataset subset(const std::vector<Index>& rows_sorted) const;
};

struct AssembleReport {
  Dataset dataset;
  std::vector<std::pair<std::string, Index>> dropped_per_country;
  Index total_dropped = 0;
};

// Builds the feature matrix and target from the raw panel plus per-country
// monthly output-gap series (aligned to each country's months, NaN where the
// gap is not yet available). Rows with any missing ingredient are dropped and
// counted.
AssembleReport assemble_dataset(const RawPanel& raw,
                                const std::vector<Eigen::VectorXd>& monthly_gap,
                                const AssembleOptions& options);

struct HpConfig;

// Quarterly gap per country, step-held across the three months of each
// quarter; NaN before the filter's expanding window opens or after the last
// complete quarter.
std::vector<Eigen::VectorXd> monthly_output_gaps(const RawPanel& raw,
                                                 const HpConfig& cfg);

struct SummaryRow {
  std::string variable;
  double mean = 0;
  double stddev = 0;
};

std::vector<SummaryRow> summary_stats(const Dataset& ds);

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds, double fraction,
                                             std::uint64_t seed);

// rows strictly before / at-or-after the cutoff month
std::pair<Dataset, Dataset> split_by_date(const Dataset& ds, YearMonth cutoff);

}  // namespace macroforest
