#include "macroforest/synth.hpp"

#include <cmath>
#include <cstdio>

#include "macroforest/rng.hpp"

namespace macroforest {

namespace {

std::string country_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "C%02d", i);
  return buf;
}

struct GlobalSeries {
  Eigen::VectorXd brent, ppi_us, ppi_ea, ppi_cn;
};

GlobalSeries draw_global(const SynthSpec& spec, Index total) {
  GlobalSeries g;
  Rng rng = Rng::substream(spec.seed, 0);

  g.brent.resize(total);
  double log_brent = std::log(60.0);
  for (Index t = 0; t < total; ++t) {
    log_brent += 0.002 + 0.09 * rng.normal();
    g.brent[t] = std::exp(log_brent);
  }

  g.ppi_us.resize(total);
  g.ppi_ea.resize(total);
  g.ppi_cn.resize(total);
  double common = 2.88 * rng.normal();  // stationary start
  for (Index t = 0; t < total; ++t) {
    common = 0.97 * common + 0.7 * rng.normal();
    g.ppi_us[t] = 1.5 + common + 0.4 * rng.normal();
    g.ppi_ea[t] = 1.5 + common + 0.4 * rng.normal();
    g.ppi_cn[t] = 1.5 + common + 0.4 * rng.normal();
  }
  return g;
}

}  // namespace

RawPanel synth_panel(const SynthSpec& spec) {
  spec.validate();
  const Index total = spec.lead_in_months + spec.months;
  const YearMonth first = spec.start.plus_months(-spec.lead_in_months);
  const GlobalSeries global = draw_global(spec, total);

  RawPanel panel;
  panel.countries.reserve(static_cast<std::size_t>(spec.n_countries));

  for (int ci = 0; ci < spec.n_countries; ++ci) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(ci) + 1);
    CountrySeries c;
    c.country = country_name(ci);
    c.start = first;

    // expectations: persistent around a country-specific anchor; anchors span
    // low- to high-expectation regimes across the panel
    Eigen::VectorXd expect(total);
    const double stationary_sd =
        spec.exp_shock / std::sqrt(1.0 - spec.exp_rho * spec.exp_rho);
    const double anchor =
        2.0 + spec.exp_anchor_spread *
                  ((double(ci) + 0.5) / double(spec.n_countries) - 0.5) +
        0.1 * rng.normal();
    double e = anchor + stationary_sd * rng.normal();
    for (Index t = 0; t < total; ++t) {
      e = anchor + spec.exp_rho * (e - anchor) + spec.exp_shock * rng.normal();
      expect[t] = e;
    }

    // quarterly real GDP: smooth trend plus a persistent cycle
    const Index n_quarters = total / 3;
    Eigen::VectorXd gdp_q(n_quarters);
    double trend = 0.0;
    double cycle = 0.038 * rng.normal();
    for (Index q = 0; q < n_quarters; ++q) {
      trend += 0.005 + 0.001 * rng.normal();
      cycle = 0.85 * cycle + 0.02 * rng.normal();
      gdp_q[q] = 100.0 * std::exp(trend + cycle);
    }
    // the gap the pipeline will see, so the data-generating relation holds
    // exactly in feature space
    const Eigen::VectorXd gap_q = output_gap<double>(gdp_q, spec.hp);

    Eigen::VectorXd neer(total);
    double log_neer = std::log(100.0);
    for (Index t = 0; t < total; ++t) {
      log_neer += 0.012 * rng.normal();
      neer[t] = std::exp(log_neer);
    }

    Eigen::VectorXd cpi(total), core(total);
    for (Index t = 0; t < 3; ++t) {
      const double level = 100.0 * std::pow(1.02, double(t) / 12.0);
      cpi[t] = level;
      core[t] = level;
    }
    for (Index t = 3; t < total; ++t) {
      const Index q = t / 3;
      const double gap = (q < n_quarters && !std::isnan(gap_q[q])) ? gap_q[q] : 0.0;
      const double exp_feature =
          expectation_12m(expect[t], expect[t], first.plus_months(int(t)).month);
      const double lag =
          t >= 6 ? quarterly_annualized_inflation(cpi, t - 3) : 2.0;
      const double core_lag =
          t >= 6 ? quarterly_annualized_inflation(core, t - 3) : 2.0;
      const double oil = t >= 12 ? cumulative_change(global.brent, t, 12) : 0.0;
      const double fx = t >= 12 ? cumulative_change(neer, t, 12) : 0.0;
      const double ppi =
          (global.ppi_us[t] + global.ppi_ea[t] + global.ppi_cn[t]) / 3.0;

      const double gap_drag = std::max(0.0, -gap - 1.0);
      const double exp_pull = std::max(0.0, exp_feature - 2.0);
      const double cross = std::max(0.0, gap) * (exp_feature - 2.0);

      const double shock = rng.normal();
      const double y = spec.beta0 + spec.beta_lag * lag +
                       spec.beta_exp * exp_feature + spec.beta_gap * gap +
                       spec.beta_oil * oil + spec.beta_neer * fx +
                       spec.beta_ppi * ppi + spec.gap_kink * gap_drag +
                       spec.exp_kink * exp_pull + spec.interaction * cross +
                       spec.noise_std * shock;

      const double core_shock = rng.normal();
      const double y_core =
          spec.core_beta0 + spec.beta_lag * core_lag +
          spec.beta_exp * exp_feature + spec.beta_gap * gap +
          spec.beta_neer * fx + spec.core_beta_ppi * ppi +
          spec.gap_kink * gap_drag + spec.exp_kink * exp_pull +
          spec.interaction * cross + spec.core_noise_std * core_shock;

      cpi[t] = cpi[t - 3] * std::pow(1.0 + y / 100.0, 0.25);
      core[t] = core[t - 3] * std::pow(1.0 + y_core / 100.0, 0.25);
    }

    c.cpi_sa = cpi;
    c.core_cpi_sa = core;
    c.consensus_cy = expect;
    c.consensus_ny = expect;
    c.brent = global.brent;
    c.neer = neer;
    c.ppi_yoy_us = global.ppi_us;
    c.ppi_yoy_ea = global.ppi_ea;
    c.ppi_yoy_cn = global.ppi_cn;

    c.real_gdp_sa = Eigen::VectorXd::Constant(total, nan_d());
    for (Index q = 0; q < n_quarters; ++q) {
      c.real_gdp_sa[3 * q + 2] = gdp_q[q];
    }

    panel.countries.push_back(std::move(c));
  }
  return panel;
}

double true_expectation_component(const SynthSpec& spec, double expectation) {
  return spec.beta_exp * expectation +
         spec.exp_kink * std::max(0.0, expectation - 2.0);
}

}  // namespace macroforest
