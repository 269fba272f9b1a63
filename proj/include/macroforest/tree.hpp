#pragma once

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"
#include "macroforest/rng.hpp"

namespace macroforest {

struct GrowConfig {
  Index min_parent = 10;  // smallest node size eligible for splitting
  int m_try = 2;          // features drawn per split; >= n_features means all

  void validate() const {
    if (min_parent < 2) throw InvalidConfigError("tree: min_parent must be >= 2");
    if (m_try < 1) throw InvalidConfigError("tree: m_try must be >= 1");
  }
};

template <typename Scalar = double>
struct SplitCandidate {
  int feature = -1;
  Scalar threshold = Scalar(0);
  Scalar weighted_mse = std::numeric_limits<Scalar>::infinity();
  Scalar sse_total = Scalar(0);  // child SSE sum behind weighted_mse
  Index n_left = 0;
};

// Improvements below this fraction of the node's accumulated y^2 are treated
// as rounding noise, so constant-target nodes do not split.
inline constexpr double kSseTol = 1e-12;

namespace detail {

template <typename Scalar>
struct FeatureScan {
  Scalar weighted_mse = std::numeric_limits<Scalar>::infinity();
  Scalar threshold = Scalar(0);
  Scalar sse_total = Scalar(0);
  Index n_left = 0;
  bool found = false;
};

// Scans every midpoint between consecutive distinct values of one feature,
// already sorted ascending (ties in original row order), via prefix sums of
// y and y^2. The strictly-less comparison keeps the lowest threshold on ties.
template <typename Scalar>
FeatureScan<Scalar> scan_sorted_feature(const Scalar* xs, const Scalar* ys,
                                        Index n, Scalar sum, Scalar sumsq) {
  FeatureScan<Scalar> best;
  Scalar sum_l = 0, sumsq_l = 0;
  for (Index i = 0; i + 1 < n; ++i) {
    const Scalar yi = ys[i];
    sum_l += yi;
    sumsq_l += yi * yi;
    const Scalar a = xs[i];
    const Scalar b = xs[i + 1];
    if (!(a < b)) continue;

    const Index nl = i + 1;
    const Index nr = n - nl;
    const Scalar sse_l = sumsq_l - sum_l * sum_l / Scalar(nl);
    const Scalar sum_r = sum - sum_l;
    const Scalar sse_r = (sumsq - sumsq_l) - sum_r * sum_r / Scalar(nr);
    const Scalar total = sse_l + sse_r;
    const Scalar wmse = total / Scalar(n);
    if (wmse < best.weighted_mse) {
      Scalar thr = Scalar(0.5) * (a + b);
      if (!(thr < b)) thr = a;  // keep the training partition intact
      best.weighted_mse = wmse;
      best.threshold = thr;
      best.sse_total = total;
      best.n_left = nl;
      best.found = true;
    }
  }
  return best;
}

}  // namespace detail

// Exhaustive scan minimizing (S_A*MSE(S_A) + S_B*MSE(S_B)) / S over the given
// features. Ties break toward the lowest feature index, then the lowest
// threshold. Returns nullopt when no split strictly reduces SSE.
template <typename Scalar>
std::optional<SplitCandidate<Scalar>> best_split(
    const MatX<Scalar>& x, const VecX<Scalar>& y, std::span<const Index> rows,
    std::span<const int> features) {
  const Index n = static_cast<Index>(rows.size());
  if (n < 2) return std::nullopt;

  Scalar sum = 0, sumsq = 0;
  for (Index r : rows) {
    sum += y[r];
    sumsq += y[r] * y[r];
  }
  const Scalar parent_sse = sumsq - sum * sum / Scalar(n);
  const Scalar guard = Scalar(kSseTol) * sumsq;

  std::vector<std::pair<Scalar, Scalar>> vals(static_cast<std::size_t>(n));
  std::vector<Scalar> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  SplitCandidate<Scalar> best;

  for (int k : features) {
    for (Index i = 0; i < n; ++i) {
      vals[static_cast<std::size_t>(i)] = {x(rows[static_cast<std::size_t>(i)], k),
                                           y[rows[static_cast<std::size_t>(i)]]};
    }
    // stable: equal feature values keep row order, so prefix sums are
    // reproducible for a given row ordering
    std::stable_sort(vals.begin(), vals.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (Index i = 0; i < n; ++i) {
      xs[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)].first;
      ys[static_cast<std::size_t>(i)] = vals[static_cast<std::size_t>(i)].second;
    }
    const auto scan = detail::scan_sorted_feature(xs.data(), ys.data(), n, sum, sumsq);
    if (scan.found && scan.weighted_mse < best.weighted_mse) {
      best.feature = k;
      best.threshold = scan.threshold;
      best.weighted_mse = scan.weighted_mse;
      best.sse_total = scan.sse_total;
      best.n_left = scan.n_left;
    }
  }

  if (best.feature < 0) return std::nullopt;
  if (!(parent_sse - best.sse_total > guard)) return std::nullopt;
  return best;
}

template <typename Scalar = double>
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    Scalar threshold = Scalar(0);
    Index left = -1;
    Index right = -1;
    Scalar prediction = Scalar(0);  // leaf mean of training targets
    Index count = 0;
  };

  std::vector<Node> nodes;  // preorder; nodes[0] is the root

  bool empty() const { return nodes.empty(); }

  // Routing rule: x[k] <= threshold goes left.
  template <typename Derived>
  Scalar predict(const Eigen::DenseBase<Derived>& x) const {
    Index id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const Node& nd = nodes[static_cast<std::size_t>(id)];
      id = (x.derived()[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return nodes[static_cast<std::size_t>(id)].prediction;
  }

  Index leaf_for(const Eigen::Ref<const VecX<Scalar>>& x) const {
    Index id = 0;
    while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const Node& nd = nodes[static_cast<std::size_t>(id)];
      id = (x[nd.feature] <= nd.threshold) ? nd.left : nd.right;
    }
    return id;
  }

  Index n_leaves() const {
    Index c = 0;
    for (const Node& nd : nodes) c += nd.feature < 0;
    return c;
  }

  Index n_internal() const { return static_cast<Index>(nodes.size()) - n_leaves(); }

  // Indented text dump for debugging; not a stability contract.
  std::string dump(const std::vector<std::string>& names = {}) const {
    std::string out;
    dump_node(0, 0, names, out);
    return out;
  }

 private:
  void dump_node(Index id, int depth, const std::vector<std::string>& names,
                 std::string& out) const {
    const Node& nd = nodes[static_cast<std::size_t>(id)];
    out.append(static_cast<std::size_t>(2 * depth), ' ');
    char buf[96];
    if (nd.feature < 0) {
      std::snprintf(buf, sizeof buf, "leaf pred=%g count=%lld\n",
                    double(nd.prediction), static_cast<long long>(nd.count));
      out += buf;
    } else {
      const std::string label =
          nd.feature < static_cast<int>(names.size())
              ? names[static_cast<std::size_t>(nd.feature)]
              : "feature" + std::to_string(nd.feature);
      std::snprintf(buf, sizeof buf, "%s <= %g\n", label.c_str(),
                    double(nd.threshold));
      out += buf;
      dump_node(nd.left, depth + 1, names, out);
      dump_node(nd.right, depth + 1, names, out);
    }
  }
};

namespace detail {

// Grows one tree over per-feature index arrays that are presorted once at the
// root and kept sorted through stable in-place partitions, so no sorting
// happens below the root.
template <typename Scalar>
class TreeGrower {
 public:
  TreeGrower(const MatX<Scalar>& x, const VecX<Scalar>& y,
             const GrowConfig& cfg, Rng& rng)
      : x_(x), y_(y), cfg_(cfg), rng_(rng), n_features_(static_cast<int>(x.cols())) {}

  RegressionTree<Scalar> grow(std::span<const Index> rows) {
    const std::size_t n = rows.size();
    node_rows_.assign(rows.begin(), rows.end());
    order_.assign(static_cast<std::size_t>(n_features_), node_rows_);
    for (int k = 0; k < n_features_; ++k) {
      std::stable_sort(order_[static_cast<std::size_t>(k)].begin(),
                       order_[static_cast<std::size_t>(k)].end(),
                       [&](Index a, Index b) { return x_(a, k) < x_(b, k); });
    }
    scratch_.resize(n);
    xs_.resize(n);
    ys_.resize(n);
    tree_.nodes.clear();
    grow_node(0, static_cast<Index>(n));
    return std::move(tree_);
  }

 private:
  Index grow_node(Index a, Index b) {
    const Index id = static_cast<Index>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const Index n = b - a;

    Scalar sum = 0, sumsq = 0;
    for (Index i = a; i < b; ++i) {
      const Scalar v = y_[node_rows_[static_cast<std::size_t>(i)]];
      sum += v;
      sumsq += v * v;
    }

    SplitCandidate<Scalar> best;
    if (n >= cfg_.min_parent) {
      const Scalar parent_sse = sumsq - sum * sum / Scalar(n);
      const Scalar guard = Scalar(kSseTol) * sumsq;
      for (int k : draw_feature_subset()) {
        const auto& ord = order_[static_cast<std::size_t>(k)];
        for (Index i = 0; i < n; ++i) {
          const Index r = ord[static_cast<std::size_t>(a + i)];
          xs_[static_cast<std::size_t>(i)] = x_(r, k);
          ys_[static_cast<std::size_t>(i)] = y_[r];
        }
        const auto scan = scan_sorted_feature(xs_.data(), ys_.data(), n, sum, sumsq);
        if (scan.found && scan.weighted_mse < best.weighted_mse) {
          best.feature = k;
          best.threshold = scan.threshold;
          best.weighted_mse = scan.weighted_mse;
          best.sse_total = scan.sse_total;
          best.n_left = scan.n_left;
        }
      }
      if (best.feature >= 0 && !(parent_sse - best.sse_total > guard)) {
        best.feature = -1;
      }
    }

    if (best.feature < 0) {
      auto& leaf = tree_.nodes[static_cast<std::size_t>(id)];
      leaf.prediction = sum / Scalar(n);
      leaf.count = n;
      return id;
    }

    const int k = best.feature;
    const Scalar thr = best.threshold;
    auto pred = [&](Index r) { return x_(r, k) <= thr; };
    const Index mid = stable_partition_segment(node_rows_, a, b, pred);
    for (auto& ord : order_) stable_partition_segment(ord, a, b, pred);
    // the scan guarantees both children nonempty

    const Index left = grow_node(a, mid);
    const Index right = grow_node(mid, b);

    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = k;
    node.threshold = thr;
    node.left = left;
    node.right = right;
    node.count = n;
    return id;
  }

  template <typename Pred>
  Index stable_partition_segment(std::vector<Index>& v, Index a, Index b,
                                 Pred pred) {
    Index lo = a;
    std::size_t spill = 0;
    for (Index i = a; i < b; ++i) {
      const Index r = v[static_cast<std::size_t>(i)];
      if (pred(r)) {
        v[static_cast<std::size_t>(lo++)] = r;
      } else {
        scratch_[spill++] = r;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(spill),
              v.begin() + lo);
    return lo;
  }

  std::span<const int> draw_feature_subset() {
    if (cfg_.m_try >= n_features_) {
      all_.resize(static_cast<std::size_t>(n_features_));
      std::iota(all_.begin(), all_.end(), 0);
      return all_;
    }
    pool_.resize(static_cast<std::size_t>(n_features_));
    std::iota(pool_.begin(), pool_.end(), 0);
    rng_.shuffle_prefix(pool_.begin(), pool_.end(),
                        static_cast<std::size_t>(cfg_.m_try));
    pool_.resize(static_cast<std::size_t>(cfg_.m_try));
    std::sort(pool_.begin(), pool_.end());
    return pool_;
  }

  const MatX<Scalar>& x_;
  const VecX<Scalar>& y_;
  GrowConfig cfg_;
  Rng& rng_;
  int n_features_;
  RegressionTree<Scalar> tree_;
  std::vector<Index> node_rows_;            // every node's rows, ascending
  std::vector<std::vector<Index>> order_;   // per feature, value-sorted
  std::vector<Index> scratch_;
  std::vector<Scalar> xs_, ys_;
  std::vector<int> all_;
  std::vector<int> pool_;
};

}  // namespace detail

// Recursive partitioning: any node with >= min_parent rows and a strictly
// SSE-reducing split over a freshly drawn feature subset is split; everything
// else becomes a leaf predicting its training mean. Deterministic given the
// generator state. `rows` must be sorted ascending.
template <typename Scalar>
RegressionTree<Scalar> grow_tree(const MatX<Scalar>& x, const VecX<Scalar>& y,
                                 std::span<const Index> rows,
                                 const GrowConfig& cfg, Rng& rng) {
  cfg.validate();
  if (rows.empty()) throw EmptyDatasetError("grow_tree: no training rows");
  detail::TreeGrower<Scalar> grower(x, y, cfg, rng);
  return grower.grow(rows);
}

template <typename Scalar>
RegressionTree<Scalar> grow_tree(const MatX<Scalar>& x, const VecX<Scalar>& y,
                                 const GrowConfig& cfg, Rng& rng) {
  std::vector<Index> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), Index(0));
  return grow_tree<Scalar>(x, y, rows, cfg, rng);
}

}  // namespace macroforest
