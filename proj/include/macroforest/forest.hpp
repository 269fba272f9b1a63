#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "macroforest/common.hpp"
#include "macroforest/errors.hpp"
#include "macroforest/io.hpp"
#include "macroforest/rng.hpp"
#include "macroforest/tree.hpp"

namespace macroforest {

struct ForestConfig {
  int n_trees = 1000;
  Index min_parent = 10;
  int m_try = 2;
  double subsample_fraction = 2.0 / 3.0;  // per-tree share drawn without replacement
  std::uint64_t seed = 0;
  bool bootstrap = false;  // classical with-replacement resampling instead

  void validate() const {
    if (n_trees < 1) throw InvalidConfigError("forest: n_trees must be >= 1");
    if (!(subsample_fraction > 0.0 && subsample_fraction < 1.0)) {
      throw InvalidConfigError("forest: subsample_fraction must be in (0,1)");
    }
    GrowConfig{min_parent, m_try}.validate();
  }
};

template <typename Scalar = double>
struct RandomForest {
  ForestConfig config;
  Index n_rows = 0;  // training set size, for out-of-bag bookkeeping
  std::vector<std::string> feature_names;
  std::vector<RegressionTree<Scalar>> trees;
  std::vector<std::vector<Index>> inbag;  // per tree, sorted ascending

  int n_trees() const { return static_cast<int>(trees.size()); }

  // unweighted mean over all trees
  template <typename Derived>
  Scalar predict(const Eigen::DenseBase<Derived>& x) const {
    return predict_prefix(x, n_trees());
  }

  // mean over the first `count` trees only
  template <typename Derived>
  Scalar predict_prefix(const Eigen::DenseBase<Derived>& x, int count) const {
    Scalar sum = 0;
    for (int j = 0; j < count; ++j) sum += trees[static_cast<std::size_t>(j)].predict(x);
    return sum / Scalar(count);
  }
};

// Trains each tree on an independent subsample drawn from a substream keyed
// by (seed, tree index); results are identical for any thread count.
template <typename Scalar>
RandomForest<Scalar> train_forest(const MatX<Scalar>& x, const VecX<Scalar>& y,
                                  const ForestConfig& cfg, int n_threads = 1,
                                  std::vector<std::string> feature_names = {}) {
  cfg.validate();
  const Index n = x.rows();
  if (n < 3) throw EmptyDatasetError("train_forest: need at least 3 rows");
  if (y.size() != n) throw LengthMismatchError("train_forest: X/y row mismatch");

  RandomForest<Scalar> forest;
  forest.config = cfg;
  forest.n_rows = n;
  forest.feature_names = std::move(feature_names);
  forest.trees.resize(static_cast<std::size_t>(cfg.n_trees));
  forest.inbag.resize(static_cast<std::size_t>(cfg.n_trees));

  const auto k_inbag = static_cast<std::size_t>(cfg.subsample_fraction * double(n));
  const GrowConfig grow_cfg{cfg.min_parent, cfg.m_try};

  auto train_one = [&](int j) {
    Rng rng = Rng::substream(cfg.seed, static_cast<std::uint64_t>(j));
    std::vector<Index>& rows = forest.inbag[static_cast<std::size_t>(j)];
    if (cfg.bootstrap) {
      rows.resize(static_cast<std::size_t>(n));
      for (auto& r : rows) r = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    } else {
      std::vector<Index> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), Index(0));
      rng.shuffle_prefix(idx.begin(), idx.end(), k_inbag);
      rows.assign(idx.begin(), idx.begin() + k_inbag);
    }
    std::sort(rows.begin(), rows.end());
    forest.trees[static_cast<std::size_t>(j)] =
        grow_tree<Scalar>(x, y, rows, grow_cfg, rng);
  };

  if (n_threads <= 1 || cfg.n_trees == 1) {
    for (int j = 0; j < cfg.n_trees; ++j) train_one(j);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int count = std::min(n_threads, cfg.n_trees);
    workers.reserve(static_cast<std::size_t>(count));
    for (int w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (int j = next.fetch_add(1); j < cfg.n_trees; j = next.fetch_add(1)) {
          train_one(j);
        }
      });
    }
    for (auto& t : workers) t.join();
  }
  return forest;
}

template <typename Scalar = double>
struct OobResult {
  VecX<Scalar> prediction;   // NaN where no tree left the row out
  Eigen::VectorXi n_trees_oob;
  Index uncovered = 0;       // rows that were in-bag everywhere
};

namespace detail {

// true at position i when row i appears in the sorted index list
inline std::vector<char> inbag_mask(const std::vector<Index>& sorted_rows, Index n) {
  std::vector<char> mask(static_cast<std::size_t>(n), 0);
  for (Index r : sorted_rows) mask[static_cast<std::size_t>(r)] = 1;
  return mask;
}

}  // namespace detail

// Per-row mean over the trees whose training subsample excluded the row,
// using the first `count` trees (count < 0 means all). Tree order is fixed,
// so results do not depend on scheduling.
template <typename Scalar>
OobResult<Scalar> oob_predictions(const RandomForest<Scalar>& forest,
                                  const MatX<Scalar>& x, int count = -1) {
  const Index n = x.rows();
  if (n != forest.n_rows) {
    throw LengthMismatchError("oob_predictions: row count differs from training set");
  }
  const int limit = count < 0 ? forest.n_trees() : count;
  VecX<Scalar> sum = VecX<Scalar>::Zero(n);
  Eigen::VectorXi cnt = Eigen::VectorXi::Zero(n);
  for (int j = 0; j < limit; ++j) {
    const auto mask = detail::inbag_mask(forest.inbag[static_cast<std::size_t>(j)], n);
    const auto& tree = forest.trees[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      if (mask[static_cast<std::size_t>(i)]) continue;
      sum[i] += tree.predict(x.row(i));
      cnt[i] += 1;
    }
  }
  OobResult<Scalar> out;
  out.prediction = VecX<Scalar>::Constant(n, nan_value<Scalar>());
  out.n_trees_oob = cnt;
  for (Index i = 0; i < n; ++i) {
    if (cnt[i] > 0) {
      out.prediction[i] = sum[i] / Scalar(cnt[i]);
    } else {
      ++out.uncovered;
    }
  }
  return out;
}

template <typename Scalar>
Scalar oob_mse(const RandomForest<Scalar>& forest, const MatX<Scalar>& x,
               const VecX<Scalar>& y, int count = -1) {
  const OobResult<Scalar> oob = oob_predictions(forest, x, count);
  Scalar sse = 0;
  Index covered = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    if (oob.n_trees_oob[i] == 0) continue;
    const Scalar e = oob.prediction[i] - y[i];
    sse += e * e;
    ++covered;
  }
  if (covered == 0) throw EmptyDatasetError("oob_mse: no out-of-bag coverage");
  return sse / Scalar(covered);
}

template <typename Scalar>
Scalar oob_rmse(const RandomForest<Scalar>& forest, const MatX<Scalar>& x,
                const VecX<Scalar>& y, int count = -1) {
  return std::sqrt(oob_mse(forest, x, y, count));
}

// RMSE of full-ensemble (or prefix) predictions over the given rows.
template <typename Scalar>
Scalar insample_rmse(const RandomForest<Scalar>& forest, const MatX<Scalar>& x,
                     const VecX<Scalar>& y, int count = -1) {
  if (y.size() != x.rows() || x.rows() == 0) {
    throw LengthMismatchError("insample_rmse: X/y mismatch");
  }
  const int limit = count < 0 ? forest.n_trees() : count;
  Scalar sse = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    const Scalar e = forest.predict_prefix(x.row(i), limit) - y[i];
    sse += e * e;
  }
  return std::sqrt(sse / Scalar(x.rows()));
}

// Out-of-bag MSE as a function of ensemble size. A checkpoint c scores each
// row with the mean of its first c out-of-bag trees (in training order), the
// out-of-bag estimate of a c-tree forest's error; rows keep their full
// out-of-bag mean once c exceeds their coverage, so the last checkpoint
// matches oob_mse and every checkpoint scores the same row set.
template <typename Scalar>
std::vector<std::pair<int, Scalar>> mse_curve(const RandomForest<Scalar>& forest,
                                              const MatX<Scalar>& x,
                                              const VecX<Scalar>& y,
                                              const std::vector<int>& checkpoints) {
  const Index n = x.rows();
  if (n != forest.n_rows || y.size() != n) {
    throw LengthMismatchError("mse_curve: row count differs from training set");
  }
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || checkpoints[i] > forest.n_trees() ||
        (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw InvalidConfigError("mse_curve: checkpoints must be increasing and <= n_trees");
    }
  }

  const auto n_cp = static_cast<Index>(checkpoints.size());
  VecX<Scalar> sum = VecX<Scalar>::Zero(n);
  Eigen::VectorXi cnt = Eigen::VectorXi::Zero(n);
  MatX<Scalar> snapshot(n, n_cp);  // per-row mean at each checkpoint count

  for (int j = 0; j < forest.n_trees(); ++j) {
    const auto mask = detail::inbag_mask(forest.inbag[static_cast<std::size_t>(j)], n);
    const auto& tree = forest.trees[static_cast<std::size_t>(j)];
    for (Index i = 0; i < n; ++i) {
      if (mask[static_cast<std::size_t>(i)]) continue;
      sum[i] += tree.predict(x.row(i));
      cnt[i] += 1;
      for (Index c = 0; c < n_cp; ++c) {
        if (cnt[i] == checkpoints[static_cast<std::size_t>(c)]) {
          snapshot(i, c) = sum[i] / Scalar(cnt[i]);
        }
      }
    }
  }

  std::vector<std::pair<int, Scalar>> curve;
  curve.reserve(checkpoints.size());
  for (Index c = 0; c < n_cp; ++c) {
    Scalar sse = 0;
    Index covered = 0;
    for (Index i = 0; i < n; ++i) {
      if (cnt[i] == 0) continue;
      const Scalar pred = cnt[i] >= checkpoints[static_cast<std::size_t>(c)]
                              ? snapshot(i, c)
                              : sum[i] / Scalar(cnt[i]);
      const Scalar e = pred - y[i];
      sse += e * e;
      ++covered;
    }
    curve.emplace_back(checkpoints[static_cast<std::size_t>(c)],
                       covered > 0 ? sse / Scalar(covered) : nan_value<Scalar>());
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Serialization: versioned plain-text flat file. Header carries the config
// and feature names; each tree stores its in-bag index list and preorder
// node records. Doubles are written so they reload bit-exactly.
// ---------------------------------------------------------------------------

inline constexpr const char* kForestMagic = "macroforest-forest";
inline constexpr int kForestFormatVersion = 1;

template <typename Scalar>
std::string serialize_forest(const RandomForest<Scalar>& forest) {
  std::ostringstream out;
  out << kForestMagic << ' ' << kForestFormatVersion << '\n';
  out << "n_trees " << forest.n_trees() << '\n';
  out << "n_rows " << forest.n_rows << '\n';
  out << "min_parent " << forest.config.min_parent << '\n';
  out << "m_try " << forest.config.m_try << '\n';
  out << "subsample_fraction " << format_double(forest.config.subsample_fraction) << '\n';
  out << "seed " << forest.config.seed << '\n';
  out << "bootstrap " << (forest.config.bootstrap ? 1 : 0) << '\n';
  out << "features " << forest.feature_names.size();
  for (const auto& name : forest.feature_names) out << ' ' << name;
  out << '\n';
  for (int j = 0; j < forest.n_trees(); ++j) {
    const auto& tree = forest.trees[static_cast<std::size_t>(j)];
    const auto& rows = forest.inbag[static_cast<std::size_t>(j)];
    out << "tree " << j << '\n';
    out << "inbag " << rows.size();
    for (Index r : rows) out << ' ' << r;
    out << '\n';
    out << "nodes " << tree.nodes.size() << '\n';
    for (const auto& nd : tree.nodes) {
      out << nd.feature << ' ' << format_double(double(nd.threshold)) << ' '
          << nd.left << ' ' << nd.right << ' '
          << format_double(double(nd.prediction)) << ' ' << nd.count << '\n';
    }
  }
  out << "end\n";
  return out.str();
}

template <typename Scalar>
void save_forest(const RandomForest<Scalar>& forest, const std::string& path) {
  write_file(path, serialize_forest(forest));
}

template <typename Scalar = double>
RandomForest<Scalar> deserialize_forest(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != kForestMagic || version != kForestFormatVersion) {
    throw IoError("not a compatible forest file");
  }
  RandomForest<Scalar> forest;
  int n_trees = 0;
  std::size_t n_features = 0;
  auto expect = [&](const char* key) {
    in >> word;
    if (!in || word != key) throw IoError(std::string("forest file: expected ") + key);
  };
  expect("n_trees");
  in >> n_trees;
  expect("n_rows");
  in >> forest.n_rows;
  expect("min_parent");
  in >> forest.config.min_parent;
  expect("m_try");
  in >> forest.config.m_try;
  expect("subsample_fraction");
  in >> forest.config.subsample_fraction;
  expect("seed");
  in >> forest.config.seed;
  expect("bootstrap");
  int flag = 0;
  in >> flag;
  forest.config.bootstrap = flag != 0;
  expect("features");
  in >> n_features;
  forest.feature_names.resize(n_features);
  for (auto& name : forest.feature_names) in >> name;
  forest.config.n_trees = n_trees;

  forest.trees.resize(static_cast<std::size_t>(n_trees));
  forest.inbag.resize(static_cast<std::size_t>(n_trees));
  for (int j = 0; j < n_trees; ++j) {
    expect("tree");
    int id = 0;
    in >> id;
    if (id != j) throw IoError("forest file: tree records out of order");
    expect("inbag");
    std::size_t count = 0;
    in >> count;
    auto& rows = forest.inbag[static_cast<std::size_t>(j)];
    rows.resize(count);
    for (auto& r : rows) in >> r;
    expect("nodes");
    std::size_t n_nodes = 0;
    in >> n_nodes;
    auto& tree = forest.trees[static_cast<std::size_t>(j)];
    tree.nodes.resize(n_nodes);
    for (auto& nd : tree.nodes) {
      double threshold = 0, prediction = 0;
      in >> nd.feature >> threshold >> nd.left >> nd.right >> prediction >> nd.count;
      nd.threshold = static_cast<Scalar>(threshold);
      nd.prediction = static_cast<Scalar>(prediction);
    }
    if (!in) throw IoError("forest file: truncated tree record");
  }
  expect("end");
  return forest;
}

template <typename Scalar = double>
RandomForest<Scalar> load_forest(const std::string& path) {
  return deserialize_forest<Scalar>(read_file(path));
}

}  // namespace macroforest
