#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include <cmath>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"

namespace macroforest {

struct HpConfig {
  double lambda = 1600.0;   // quarterly-frequency default
  Index min_window = 12;    // smallest expanding sample for the one-sided pass

  void validate() const {
    if (!(lambda > 0)) throw InvalidConfigError("hp: lambda must be > 0");
    if (min_window < 8) throw InvalidConfigError("hp: min_window must be >= 8");
  }
};

// Trend that minimizes sum (y_t - tau_t)^2 + lambda * sum (d2 tau_t)^2.
// The first-order conditions form a symmetric positive definite
// pentadiagonal system (I + lambda D'D) tau = y, solved with a sparse
// Cholesky factorization.
template <typename Scalar>
VecX<Scalar> hp_trend(const Eigen::Ref<const VecX<Scalar>>& y, Scalar lambda) {
  const Index n = y.size();
  if (n < 4) throw SeriesTooShortError("hp_trend: need at least 4 points");
  if (!y.allFinite()) throw InvalidConfigError("hp_trend: non-finite input");

  using Triplet = Eigen::Triplet<Scalar>;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(5 * n));

  // I + lambda D'D where D is the (n-2) x n second-difference operator
  auto add = [&](Index r, Index c, Scalar v) { entries.emplace_back(r, c, v); };
  for (Index i = 0; i < n; ++i) add(i, i, Scalar(1));
  for (Index r = 0; r + 2 < n; ++r) {
    // row r of D touches columns r, r+1, r+2 with weights 1, -2, 1
    add(r, r, lambda);
    add(r, r + 1, Scalar(-2) * lambda);
    add(r, r + 2, lambda);
    add(r + 1, r, Scalar(-2) * lambda);
    add(r + 1, r + 1, Scalar(4) * lambda);
    add(r + 1, r + 2, Scalar(-2) * lambda);
    add(r + 2, r, lambda);
    add(r + 2, r + 1, Scalar(-2) * lambda);
    add(r + 2, r + 2, lambda);
  }

  Eigen::SparseMatrix<Scalar> a(n, n);
  a.setFromTriplets(entries.begin(), entries.end());

  Eigen::SimplicialLLT<Eigen::SparseMatrix<Scalar>> solver;
  solver.compute(a);
  if (solver.info() != Eigen::Success) {
    throw Error("hp_trend: factorization failed");
  }
  VecX<Scalar> tau = solver.solve(y);

  const Scalar scale = y.norm();
  const Scalar tol = std::max(Scalar(1e-9),
                              Scalar(1e4) * std::numeric_limits<Scalar>::epsilon());
  if (scale > Scalar(0) && (a * tau - y).norm() > tol * scale) {
    tau += solver.solve(VecX<Scalar>(y - a * tau));  // one refinement step
    if ((a * tau - y).norm() > tol * scale) {
      throw Error("hp_trend: solution residual above tolerance");
    }
  }
  return tau;
}

// One-sided variant: the trend at t is the endpoint of the two-sided filter
// run on the sample up to t only, so no future information enters. Entries
// before min_window-1 are NaN.
template <typename Scalar>
VecX<Scalar> hp_trend_one_sided(const Eigen::Ref<const VecX<Scalar>>& y,
                                const HpConfig& cfg) {
  cfg.validate();
  const Index n = y.size();
  if (n < cfg.min_window) {
    throw SeriesTooShortError("hp_trend_one_sided: series shorter than min_window");
  }
  VecX<Scalar> tau = VecX<Scalar>::Constant(n, nan_value<Scalar>());
  for (Index t = cfg.min_window - 1; t < n; ++t) {
    const VecX<Scalar> prefix =
        hp_trend<Scalar>(y.head(t + 1), static_cast<Scalar>(cfg.lambda));
    tau[t] = prefix[t];
  }
  return tau;
}

// Percent deviation of GDP from its one-sided trend, filtered in log levels:
// gap_t = 100*log(y_t) - trend(100*log y)_t.
template <typename Scalar>
VecX<Scalar> output_gap(const Eigen::Ref<const VecX<Scalar>>& gdp,
                        const HpConfig& cfg) {
  for (Index i = 0; i < gdp.size(); ++i) {
    if (!(gdp[i] > Scalar(0))) {
      throw NonPositiveIndexError("output_gap: GDP must be positive");
    }
  }
  const VecX<Scalar> log_level = Scalar(100) * gdp.array().log();
  const VecX<Scalar> tau = hp_trend_one_sided<Scalar>(log_level, cfg);
  return log_level - tau;  // NaN head propagates
}

}  // namespace macroforest
