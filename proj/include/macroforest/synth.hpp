#pragma once

#include <cstdint>

#include "macroforest/dates.hpp"
#include "macroforest/hp_filter.hpp"
#include "macroforest/panel.hpp"

namespace macroforest {

// Synthetic panel specification. The generated inflation follows
//   y = b'x + gap_kink * max(0, -gap - 1) + exp_kink * max(0, exp - 2)
//       + interaction * max(0, gap) * (exp - 2) + noise
// where x holds the six constructed features and gap is the one-sided
// filtered gap the pipeline itself would compute, so the relationship holds
// exactly in feature space. Countries share the oil and producer-price
// series; everything else is country-specific.
struct SynthSpec {
  int n_countries = 20;
  int months = 258;          // emitted span starting at `start`
  int lead_in_months = 24;   // extra history before `start` so early features exist
  YearMonth start{2000, 1};

  double beta0 = -0.15;
  double beta_lag = 0.3;
  double beta_exp = 1.1;
  double exp_rho = 0.88;          // monthly persistence of expectations
  double exp_shock = 0.60;        // innovation scale of expectations
  double exp_anchor_spread = 0.0; // width of the band of country anchors
  double beta_gap = 0.05;
  double beta_oil = 0.012;
  double beta_neer = 0.0;  // exchange-rate noise carries no signal by default
  double beta_ppi = 0.18;
  double gap_kink = -1.2;     // extra drag when the gap is below -1
  double exp_kink = 0.7;      // extra pull when expectations exceed 2
  double interaction = 0.0;
  double noise_std = 0.65;

  // core inflation: oil stripped out, milder noise
  double core_beta0 = -0.55;
  double core_beta_ppi = 0.10;
  double core_noise_std = 0.5;

  HpConfig hp;  // the gap entering the DGP uses this filter
  std::uint64_t seed = 42;

  void validate() const {
    if (n_countries < 1) throw InvalidConfigError("synth: n_countries must be >= 1");
    if (months < 48) throw InvalidConfigError("synth: months must be >= 48");
    if (lead_in_months < 0 || lead_in_months % 3 != 0) {
      throw InvalidConfigError("synth: lead_in_months must be a nonnegative multiple of 3");
    }
    if (!(noise_std >= 0)) throw InvalidConfigError("synth: noise_std must be >= 0");
    hp.validate();
  }
};

RawPanel synth_panel(const SynthSpec& spec);

// The target's dependence on the expectations feature alone, used to check
// recovered partial-effect curves against the generator.
double true_expectation_component(const SynthSpec& spec, double expectation);

}  // namespace macroforest
