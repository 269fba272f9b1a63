#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"
#include "macroforest/forest.hpp"
#include "macroforest/stats.hpp"

namespace macroforest {

template <typename Scalar = double>
struct ImportanceVector {
  VecX<Scalar> raw;         // mean total SSE reduction per tree, by feature
  VecX<Scalar> normalized;  // sums to one; all zero when no tree ever split
  bool any_splits = false;
};

namespace detail {

// Replays a tree's partitions over its own training subsample, crediting each
// split with parent SSE minus child SSEs.
template <typename Scalar>
class ImportanceReplay {
 public:
  ImportanceReplay(const RegressionTree<Scalar>& tree, const MatX<Scalar>& x,
                   const VecX<Scalar>& y, VecX<Scalar>& credit)
      : tree_(tree), x_(x), y_(y), credit_(credit) {}

  void run(std::vector<Index> rows) {
    rows_ = std::move(rows);
    walk(0, 0, static_cast<Index>(rows_.size()));
  }

 private:
  Scalar sse(Index a, Index b) const {
    Scalar sum = 0, sumsq = 0;
    for (Index i = a; i < b; ++i) {
      const Scalar v = y_[rows_[static_cast<std::size_t>(i)]];
      sum += v;
      sumsq += v * v;
    }
    return sumsq - sum * sum / Scalar(b - a);
  }

  void walk(Index node_id, Index a, Index b) {
    const auto& nd = tree_.nodes[static_cast<std::size_t>(node_id)];
    if (nd.feature < 0 || b - a < 2) return;
    const int k = nd.feature;
    const Scalar thr = nd.threshold;
    const auto mid_it =
        std::stable_partition(rows_.begin() + a, rows_.begin() + b,
                              [&](Index r) { return x_(r, k) <= thr; });
    const Index mid = static_cast<Index>(mid_it - rows_.begin());
    if (mid == a || mid == b) return;  // degenerate replay, no credit
    const Scalar gain = sse(a, b) - sse(a, mid) - sse(mid, b);
    credit_[k] += gain;
    walk(nd.left, a, mid);
    walk(nd.right, mid, b);
  }

  const RegressionTree<Scalar>& tree_;
  const MatX<Scalar>& x_;
  const VecX<Scalar>& y_;
  VecX<Scalar>& credit_;
  std::vector<Index> rows_;
};

}  // namespace detail

// Impurity importance: per split, the SSE reduction on the tree's training
// subsample is credited to the split feature; per-tree totals are averaged
// over trees and normalized to sum to one.
template <typename Scalar>
ImportanceVector<Scalar> impurity_importance(const RandomForest<Scalar>& forest,
                                             const MatX<Scalar>& x,
                                             const VecX<Scalar>& y) {
  if (x.rows() != forest.n_rows || y.size() != x.rows()) {
    throw LengthMismatchError("impurity_importance: data does not match training set");
  }
  const Index n_features = x.cols();
  VecX<Scalar> total = VecX<Scalar>::Zero(n_features);
  for (int j = 0; j < forest.n_trees(); ++j) {
    detail::ImportanceReplay<Scalar> replay(
        forest.trees[static_cast<std::size_t>(j)], x, y, total);
    replay.run(forest.inbag[static_cast<std::size_t>(j)]);
  }
  ImportanceVector<Scalar> out;
  out.raw = total / Scalar(forest.n_trees());
  const Scalar sum = out.raw.sum();
  out.any_splits = sum > Scalar(0);
  out.normalized = out.any_splits ? VecX<Scalar>(out.raw / sum)
                                  : VecX<Scalar>::Zero(n_features);
  return out;
}

template <typename Scalar = double>
struct PartialEffectCurve {
  int feature = -1;
  VecX<Scalar> grid;             // strictly increasing, in feature units
  VecX<Scalar> prediction;
  VecX<Scalar> covariate_means;  // the profile the other features are held at
};

// Predicted outcome as feature k sweeps a grid between trim quantiles while
// every other feature is pinned at its sample mean. This is the at-means
// profile, not the sample-averaged partial dependence.
template <typename Scalar>
PartialEffectCurve<Scalar> partial_effect(const RandomForest<Scalar>& forest,
                                          const MatX<Scalar>& x, int feature,
                                          Index n_grid = 50,
                                          double trim_lo = 0.01,
                                          double trim_hi = 0.99) {
  if (feature < 0 || feature >= x.cols()) {
    throw InvalidConfigError("partial_effect: feature index out of range");
  }
  if (n_grid < 2) throw InvalidConfigError("partial_effect: need n_grid >= 2");

  std::vector<Scalar> column(x.col(feature).data(),
                             x.col(feature).data() + x.rows());
  const Scalar lo = quantile(column, trim_lo);
  const Scalar hi = quantile(column, trim_hi);
  if (!(lo < hi)) {
    throw DegenerateFeatureError("partial_effect: feature " + std::to_string(feature) +
                                 " is constant over the trimmed range");
  }

  PartialEffectCurve<Scalar> curve;
  curve.feature = feature;
  curve.covariate_means = x.colwise().mean();
  curve.grid = VecX<Scalar>::LinSpaced(n_grid, lo, hi);
  curve.prediction.resize(n_grid);
  VecX<Scalar> probe = curve.covariate_means;
  for (Index i = 0; i < n_grid; ++i) {
    probe[feature] = curve.grid[i];
    curve.prediction[i] = forest.predict(probe);
  }
  return curve;
}

// Least-squares slope of the curve's predictions on its grid.
template <typename Scalar>
Scalar average_slope(const PartialEffectCurve<Scalar>& curve) {
  const Index n = curve.grid.size();
  if (n < 2) throw LengthMismatchError("average_slope: need at least 2 grid points");
  const Scalar gm = curve.grid.mean();
  const Scalar pm = curve.prediction.mean();
  const VecX<Scalar> dg = curve.grid.array() - gm;
  const Scalar sxx = dg.squaredNorm();
  return dg.dot(VecX<Scalar>(curve.prediction.array() - pm)) / sxx;
}

template <typename Scalar = double>
struct PartialSurface {
  int feature_a = -1, feature_b = -1;
  VecX<Scalar> grid_a, grid_b;
  MatX<Scalar> prediction;  // prediction(i, j) at (grid_a[i], grid_b[j])
};

// Two-feature analogue of partial_effect; everything else held at means.
template <typename Scalar>
PartialSurface<Scalar> partial_surface(const RandomForest<Scalar>& forest,
                                       const MatX<Scalar>& x, int feature_a,
                                       int feature_b, Index n_grid = 25,
                                       double trim_lo = 0.01,
                                       double trim_hi = 0.99) {
  const PartialEffectCurve<Scalar> ca =
      partial_effect(forest, x, feature_a, n_grid, trim_lo, trim_hi);
  const PartialEffectCurve<Scalar> cb =
      partial_effect(forest, x, feature_b, n_grid, trim_lo, trim_hi);
  PartialSurface<Scalar> surf;
  surf.feature_a = feature_a;
  surf.feature_b = feature_b;
  surf.grid_a = ca.grid;
  surf.grid_b = cb.grid;
  surf.prediction.resize(n_grid, n_grid);
  VecX<Scalar> probe = ca.covariate_means;
  for (Index i = 0; i < n_grid; ++i) {
    probe[feature_a] = surf.grid_a[i];
    for (Index j = 0; j < n_grid; ++j) {
      probe[feature_b] = surf.grid_b[j];
      surf.prediction(i, j) = forest.predict(probe);
    }
  }
  return surf;
}

}  // namespace macroforest
