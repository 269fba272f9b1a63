#pragma once

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"
#include "macroforest/rng.hpp"

namespace macroforest {

enum class RobustSe { hc0, hc1, hc3 };

template <typename Scalar = double>
struct OlsFit {
  VecX<Scalar> coef;  // constant first when the design carries an intercept
  VecX<Scalar> se;    // heteroskedasticity-robust
  VecX<Scalar> t;
  Scalar r2 = 0;
  Scalar f_stat = 0;  // against the intercept-only model
  Index n = 0;
};

// Least squares of y on a design matrix whose first column is the intercept.
// Coefficients come from the normal equations (the designs here are small and
// well scaled); standard errors use the White sandwich, HC1 by default.
template <typename Scalar>
OlsFit<Scalar> ols_fit(const MatX<Scalar>& x, const VecX<Scalar>& y,
                       RobustSe kind = RobustSe::hc1) {
  const Index n = x.rows();
  const Index k = x.cols();
  if (y.size() != n) throw LengthMismatchError("ols_fit: X/y row mismatch");
  if (n <= k) throw Error("ols_fit: need more rows than columns");

  Eigen::ColPivHouseholderQR<MatX<Scalar>> qr(x);
  if (qr.rank() < k) {
    // columns permuted past the numerical rank are the dependent ones
    const auto& perm = qr.colsPermutation().indices();
    int offending = static_cast<int>(k) - 1;
    for (Index i = qr.rank(); i < k; ++i) {
      offending = std::min(offending, static_cast<int>(perm[i]));
    }
    throw RankDeficientError(offending, "ols_fit: rank-deficient design, column " +
                                            std::to_string(offending));
  }

  const MatX<Scalar> xtx = x.transpose() * x;
  const Eigen::LDLT<MatX<Scalar>> ldlt(xtx);
  OlsFit<Scalar> fit;
  fit.n = n;
  fit.coef = ldlt.solve(x.transpose() * y);

  const VecX<Scalar> resid = y - x * fit.coef;
  const MatX<Scalar> xtx_inv = ldlt.solve(MatX<Scalar>::Identity(k, k));

  VecX<Scalar> weight = resid.array().square();
  if (kind == RobustSe::hc1) {
    weight *= Scalar(n) / Scalar(n - k);
  } else if (kind == RobustSe::hc3) {
    const VecX<Scalar> leverage = ((x * xtx_inv).array() * x.array()).rowwise().sum();
    weight.array() /= (Scalar(1) - leverage.array()).square();
  }
  const MatX<Scalar> meat = x.transpose() * weight.asDiagonal() * x;
  const MatX<Scalar> cov = xtx_inv * meat * xtx_inv;

  fit.se = cov.diagonal().array().sqrt();
  fit.t = fit.coef.array() / fit.se.array();

  const Scalar ssr = resid.squaredNorm();
  const Scalar sst = (y.array() - y.mean()).square().sum();
  fit.r2 = sst > Scalar(0) ? Scalar(1) - ssr / sst : Scalar(0);
  if (k > 1) {
    fit.f_stat = ssr > Scalar(0)
                     ? ((sst - ssr) / Scalar(k - 1)) / (ssr / Scalar(n - k))
                     : std::numeric_limits<Scalar>::infinity();
  }
  return fit;
}

// AR(1): y on constant + its lag.
template <typename Scalar>
OlsFit<Scalar> ar1_fit(const VecX<Scalar>& y, const VecX<Scalar>& y_lag,
                       RobustSe kind = RobustSe::hc1) {
  if (y.size() != y_lag.size()) throw LengthMismatchError("ar1_fit: length mismatch");
  if (y.size() < 3) throw Error("ar1_fit: need at least 3 pairs");
  MatX<Scalar> x(y.size(), 2);
  x.col(0).setOnes();
  x.col(1) = y_lag;
  return ols_fit(x, y, kind);
}

template <typename Scalar>
Scalar rmse(const VecX<Scalar>& pred, const VecX<Scalar>& actual) {
  if (pred.size() != actual.size() || pred.size() == 0) {
    throw LengthMismatchError("rmse: length mismatch");
  }
  return std::sqrt((pred - actual).squaredNorm() / Scalar(pred.size()));
}

template <typename Scalar = double>
struct OosStats {
  Scalar mean = 0;
  Scalar stddev = 0;
  int n_reps = 0;
};

// Repeated-split protocol: fit on a fresh fraction of the rows, score RMSE on
// the remainder, repeat. Each repetition draws its partition from a substream
// of the seed (repetition r uses substream_seed(seed, r)), so a single run
// reproduces any repetition on demand.
template <typename Scalar, typename Model>
OosStats<Scalar> oos_protocol(Model&& fit_predict, const MatX<Scalar>& x,
                              const VecX<Scalar>& y, int n_reps,
                              double fraction, std::uint64_t seed) {
  if (n_reps < 1) throw InvalidConfigError("oos_protocol: n_reps must be >= 1");
  const Index n = x.rows();
  VecX<Scalar> scores(n_reps);
  for (int rep = 0; rep < n_reps; ++rep) {
    const auto [train, test] =
        split_indices(n, fraction, substream_seed(seed, static_cast<std::uint64_t>(rep)));
    MatX<Scalar> xtr(static_cast<Index>(train.size()), x.cols());
    VecX<Scalar> ytr(static_cast<Index>(train.size()));
    for (std::size_t i = 0; i < train.size(); ++i) {
      xtr.row(static_cast<Index>(i)) = x.row(train[i]);
      ytr[static_cast<Index>(i)] = y[train[i]];
    }
    MatX<Scalar> xte(static_cast<Index>(test.size()), x.cols());
    VecX<Scalar> yte(static_cast<Index>(test.size()));
    for (std::size_t i = 0; i < test.size(); ++i) {
      xte.row(static_cast<Index>(i)) = x.row(test[i]);
      yte[static_cast<Index>(i)] = y[test[i]];
    }
    try {
      const VecX<Scalar> pred = fit_predict(xtr, ytr, xte);
      scores[rep] = rmse<Scalar>(pred, yte);
    } catch (const Error& e) {
      throw Error("oos_protocol: repetition " + std::to_string(rep) + ": " + e.what());
    }
  }
  OosStats<Scalar> out;
  out.n_reps = n_reps;
  out.mean = scores.mean();
  if (n_reps > 1) {
    out.stddev = std::sqrt((scores.array() - out.mean).square().sum() / Scalar(n_reps - 1));
  }
  return out;
}

inline double safe_ratio(double numerator, double denominator) {
  if (!(denominator > 0.0)) {
    throw DivisionByZeroError("ratio against a non-positive benchmark RMSE");
  }
  return numerator / denominator;
}

// One row of the pruning-grid comparison table.
struct RatioRow {
  Index min_parent = 0;
  int n_trees = 0;
  double ml_in = 0;
  double ml_oob = 0;
  double ratio_ar1_in = 0;
  double ratio_ols_in = 0;
  double ratio_ar1_out = 0;
  double ratio_ols_out = 0;
};

struct BenchmarkReport {
  double ar1_in = 0;
  double ols_in = 0;
  double ar1_out_mean = 0, ar1_out_std = 0;
  double ols_out_mean = 0, ols_out_std = 0;
  std::vector<RatioRow> rows;
};

inline RatioRow make_ratio_row(Index min_parent, int n_trees, double ml_in,
                               double ml_oob, const BenchmarkReport& bench) {
  RatioRow row;
  row.min_parent = min_parent;
  row.n_trees = n_trees;
  row.ml_in = ml_in;
  row.ml_oob = ml_oob;
  row.ratio_ar1_in = safe_ratio(ml_in, bench.ar1_in);
  row.ratio_ols_in = safe_ratio(ml_in, bench.ols_in);
  row.ratio_ar1_out = safe_ratio(ml_oob, bench.ar1_out_mean);
  row.ratio_ols_out = safe_ratio(ml_oob, bench.ols_out_mean);
  return row;
}

}  // namespace macroforest
