// Independent reference implementations used only by the test suites. These
// deliberately take different computational routes from the library: dense
// full-matrix solves, two-pass statistics, row-order loops.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "macroforest/common.hpp"

namespace oracle {

using macroforest::Index;

// --------------------------------------------------------------------------
// Trend filter: dense normal equations solved by full-pivot LU.
// --------------------------------------------------------------------------

inline Eigen::VectorXd dense_hp_trend(const Eigen::VectorXd& y, double lambda) {
  const Index n = y.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n - 2, n);
  for (Index r = 0; r + 2 < n; ++r) {
    d(r, r) = 1.0;
    d(r, r + 1) = -2.0;
    d(r, r + 2) = 1.0;
  }
  const Eigen::MatrixXd a =
      Eigen::MatrixXd::Identity(n, n) + lambda * d.transpose() * d;
  return a.fullPivLu().solve(y);
}

inline Eigen::VectorXd dense_hp_one_sided(const Eigen::VectorXd& y, double lambda,
                                          Index min_window) {
  Eigen::VectorXd out =
      Eigen::VectorXd::Constant(y.size(), std::numeric_limits<double>::quiet_NaN());
  for (Index t = min_window - 1; t < y.size(); ++t) {
    out[t] = dense_hp_trend(y.head(t + 1), lambda)[t];
  }
  return out;
}

// --------------------------------------------------------------------------
// Least squares: explicit normal equations with an explicit inverse, sandwich
// covariance assembled by row loops.
// --------------------------------------------------------------------------

struct OlsOracle {
  Eigen::VectorXd coef, se, t;
  double r2 = 0, f_stat = 0;
};

inline OlsOracle dense_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           bool hc1 = true) {
  const Index n = x.rows();
  const Index k = x.cols();
  OlsOracle fit;
  const Eigen::MatrixXd xtx_inv = (x.transpose() * x).fullPivLu().inverse();
  fit.coef = xtx_inv * (x.transpose() * y);
  const Eigen::VectorXd resid = y - x * fit.coef;

  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(k, k);
  for (Index i = 0; i < n; ++i) {
    meat += resid[i] * resid[i] * x.row(i).transpose() * x.row(i);
  }
  if (hc1) meat *= double(n) / double(n - k);
  const Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv;
  fit.se.resize(k);
  fit.t.resize(k);
  for (Index j = 0; j < k; ++j) {
    fit.se[j] = std::sqrt(cov(j, j));
    fit.t[j] = fit.coef[j] / fit.se[j];
  }

  double ssr = 0, sst = 0;
  const double ybar = y.mean();
  for (Index i = 0; i < n; ++i) {
    ssr += resid[i] * resid[i];
    sst += (y[i] - ybar) * (y[i] - ybar);
  }
  fit.r2 = 1.0 - ssr / sst;
  fit.f_stat = ((sst - ssr) / double(k - 1)) / (ssr / double(n - k));
  return fit;
}

// Closed-form simple-regression slope.
inline double ols_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double xm = x.mean();
  const double ym = y.mean();
  double sxy = 0, sxx = 0;
  for (Index i = 0; i < x.size(); ++i) {
    sxy += (x[i] - xm) * (y[i] - ym);
    sxx += (x[i] - xm) * (x[i] - xm);
  }
  return sxy / sxx;
}

// --------------------------------------------------------------------------
// Brute-force recursive partitioning. Candidate enumeration, SSE evaluation
// (two-pass: mean, then squared deviations) and row bookkeeping all run over
// rows in ascending index order.
// --------------------------------------------------------------------------

inline double two_pass_sse(const Eigen::VectorXd& y, const std::vector<Index>& rows) {
  double sum = 0;
  for (Index r : rows) sum += y[r];
  const double mean = sum / double(rows.size());
  double sse = 0;
  for (Index r : rows) sse += (y[r] - mean) * (y[r] - mean);
  return sse;
}

struct BruteSplit {
  int feature = -1;
  double threshold = 0;
  double weighted_mse = std::numeric_limits<double>::infinity();
  double sse_total = 0;
};

inline std::optional<BruteSplit> brute_best_split(const Eigen::MatrixXd& x,
                                                  const Eigen::VectorXd& y,
                                                  const std::vector<Index>& rows) {
  const Index n = static_cast<Index>(rows.size());
  if (n < 2) return std::nullopt;
  double sumsq = 0;
  for (Index r : rows) sumsq += y[r] * y[r];
  const double parent = two_pass_sse(y, rows);

  BruteSplit best;
  for (int k = 0; k < x.cols(); ++k) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (Index r : rows) values.push_back(x(r, k));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      double thr = 0.5 * (values[v] + values[v + 1]);
      if (!(thr < values[v + 1])) thr = values[v];
      std::vector<Index> left, right;
      for (Index r : rows) (x(r, k) <= thr ? left : right).push_back(r);
      const double sse_l = two_pass_sse(y, left);
      const double sse_r = two_pass_sse(y, right);
      const double wmse = (sse_l + sse_r) / double(n);
      if (wmse < best.weighted_mse) {
        best.feature = k;
        best.threshold = thr;
        best.weighted_mse = wmse;
        best.sse_total = sse_l + sse_r;
      }
    }
  }
  if (best.feature < 0) return std::nullopt;
  if (!(parent - best.sse_total > 1e-12 * sumsq)) return std::nullopt;
  return best;
}

// Returns each training row's fitted value (its leaf's mean) plus a routable
// tree for probing arbitrary points.
struct BruteNode {
  int feature = -1;
  double threshold = 0;
  double prediction = 0;
  int left = -1, right = -1;
};

struct BruteTree {
  std::vector<BruteNode> nodes;

  double predict(const Eigen::RowVectorXd& x) const {
    int id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& nd = nodes[static_cast<std::size_t>(id)];
      id = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(id)].prediction;
  }
};

inline int brute_grow_node(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                           const std::vector<Index>& rows, Index min_parent,
                           BruteTree& tree,
                           std::map<Index, double>& fitted) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();

  std::optional<BruteSplit> split;
  if (static_cast<Index>(rows.size()) >= min_parent) {
    split = brute_best_split(x, y, rows);
  }
  if (!split) {
    double sum = 0;
    for (Index r : rows) sum += y[r];
    const double mean = sum / double(rows.size());
    tree.nodes[static_cast<std::size_t>(id)].prediction = mean;
    for (Index r : rows) fitted[r] = mean;
    return id;
  }
  std::vector<Index> left, right;
  for (Index r : rows) {
    (x(r, split->feature) <= split->threshold ? left : right).push_back(r);
  }
  const int l = brute_grow_node(x, y, left, min_parent, tree, fitted);
  const int rgt = brute_grow_node(x, y, right, min_parent, tree, fitted);
  auto& nd = tree.nodes[static_cast<std::size_t>(id)];
  nd.feature = split->feature;
  nd.threshold = split->threshold;
  nd.left = l;
  nd.right = rgt;
  return id;
}

struct BruteResult {
  BruteTree tree;
  std::map<Index, double> fitted;  // row -> leaf mean
};

inline BruteResult brute_grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              Index min_parent) {
  BruteResult out;
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  for (Index i = 0; i < x.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  brute_grow_node(x, y, rows, min_parent, out.tree, out.fitted);
  return out;
}

}  // namespace oracle
