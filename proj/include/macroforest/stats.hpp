#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"

namespace macroforest {

template <typename Derived>
typename Derived::Scalar mean(const Eigen::DenseBase<Derived>& v) {
  return v.derived().mean();
}

// sample standard deviation (n-1 denominator)
template <typename Derived>
typename Derived::Scalar sample_std(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Index n = v.size();
  if (n < 2) return Scalar(0);
  const Scalar m = v.derived().mean();
  const Scalar ss = (v.derived().array() - m).square().sum();
  return std::sqrt(ss / Scalar(n - 1));
}

// linear-interpolation quantile on a copy (q in [0,1])
template <typename Scalar>
Scalar quantile(std::vector<Scalar> values, double q) {
  if (values.empty()) throw LengthMismatchError("quantile of empty range");
  std::sort(values.begin(), values.end());
  const double pos = q * double(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - double(lo);
  return static_cast<Scalar>((1.0 - w) * values[lo] + w * values[hi]);
}

template <typename Scalar>
Scalar pearson(const VecX<Scalar>& a, const VecX<Scalar>& b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw LengthMismatchError("pearson: length mismatch");
  }
  const VecX<Scalar> da = a.array() - a.mean();
  const VecX<Scalar> db = b.array() - b.mean();
  const Scalar denom = std::sqrt(da.squaredNorm() * db.squaredNorm());
  if (denom == Scalar(0)) return Scalar(0);
  return da.dot(db) / denom;
}

// midranks (average over ties)
template <typename Scalar>
VecX<Scalar> ranks(const VecX<Scalar>& v) {
  const Index n = v.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return v[a] < v[b]; });
  VecX<Scalar> r(n);
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && v[order[static_cast<std::size_t>(j + 1)]] ==
                            v[order[static_cast<std::size_t>(i)]]) {
      ++j;
    }
    const Scalar avg = Scalar(i + j) / Scalar(2) + Scalar(1);
    for (Index k = i; k <= j; ++k) r[order[static_cast<std::size_t>(k)]] = avg;
    i = j + 1;
  }
  return r;
}

template <typename Scalar>
Scalar spearman(const VecX<Scalar>& a, const VecX<Scalar>& b) {
  return pearson<Scalar>(ranks(a), ranks(b));
}

}  // namespace macroforest
