#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "macroforest/tree.hpp"
#include "oracles.hpp"

using namespace macroforest;

namespace {

std::vector<Index> all_rows(Index n) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), Index(0));
  return rows;
}

std::vector<int> all_features(int k) {
  std::vector<int> f(static_cast<std::size_t>(k));
  std::iota(f.begin(), f.end(), 0);
  return f;
}

// leaf index reached by every training row
std::vector<Index> leaf_assignment(const RegressionTree<double>& tree,
                                   const Eigen::MatrixXd& x) {
  std::vector<Index> out;
  for (Index i = 0; i < x.rows(); ++i) {
    out.push_back(tree.leaf_for(x.row(i).transpose()));
  }
  return out;
}

}  // namespace

TEST_CASE("best split separates a clean two-level target") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  const auto split = best_split<double>(x, y, all_rows(4), all_features(1));
  REQUIRE(split.has_value());
  CHECK(split->feature == 0);
  CHECK(split->threshold == 2.5);
  CHECK(split->weighted_mse == 0.0);
}

TEST_CASE("best split on a linear target picks the middle") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  // midpoints 1.5 / 2.5 / 3.5 score 0.5 / 0.25 / 0.5
  const auto split = best_split<double>(x, y, all_rows(4), all_features(1));
  REQUIRE(split.has_value());
  CHECK(split->threshold == 2.5);
  CHECK(split->weighted_mse == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("constant target yields no split") {
  Eigen::MatrixXd x(5, 2);
  Rng rng(3);
  for (Index i = 0; i < 5; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
  }
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(5, 4.2);
  CHECK_FALSE(best_split<double>(x, y, all_rows(5), all_features(2)).has_value());
}

TEST_CASE("constant features yield no split") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 2, 1.0);
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 6;
  CHECK_FALSE(best_split<double>(x, y, all_rows(6), all_features(2)).has_value());
}

TEST_CASE("grow: two-level target becomes a depth-one tree") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  Rng rng(0);
  const auto tree = grow_tree<double>(x, y, GrowConfig{2, 1}, rng);
  CHECK(tree.nodes.size() == 3);
  CHECK(tree.n_leaves() == 2);
  const auto& root = tree.nodes[0];
  CHECK(root.threshold == 2.5);
  CHECK(tree.nodes[static_cast<std::size_t>(root.left)].prediction == 0.0);
  CHECK(tree.nodes[static_cast<std::size_t>(root.right)].prediction == 10.0);
}

TEST_CASE("grow: min_parent above sample count gives a single leaf") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  Rng rng(0);
  const auto tree = grow_tree<double>(x, y, GrowConfig{5, 1}, rng);
  CHECK(tree.nodes.size() == 1);
  CHECK(tree.nodes[0].prediction == doctest::Approx(5.0));
  CHECK(tree.nodes[0].count == 4);
}

TEST_CASE("grow: equal targets give a single leaf") {
  Eigen::MatrixXd x(6, 2);
  Rng data_rng(5);
  for (Index i = 0; i < 6; ++i) {
    x(i, 0) = data_rng.uniform();
    x(i, 1) = data_rng.uniform();
  }
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(6, -1.5);
  Rng rng(0);
  const auto tree = grow_tree<double>(x, y, GrowConfig{2, 2}, rng);
  CHECK(tree.nodes.size() == 1);
}

TEST_CASE("predict: boundary value routes left") {
  RegressionTree<double> tree;
  tree.nodes.resize(3);
  tree.nodes[0].feature = 0;
  tree.nodes[0].threshold = 2.5;
  tree.nodes[0].left = 1;
  tree.nodes[0].right = 2;
  tree.nodes[1].prediction = -1.0;
  tree.nodes[2].prediction = 1.0;
  Eigen::VectorXd at_boundary(1), above(1);
  at_boundary << 2.5;
  above << 2.5000001;
  CHECK(tree.predict(at_boundary) == -1.0);
  CHECK(tree.predict(above) == 1.0);
}

TEST_CASE("single-leaf tree predicts its mean everywhere") {
  RegressionTree<double> tree;
  tree.nodes.resize(1);
  tree.nodes[0].prediction = 5.0;
  Eigen::VectorXd x(3);
  x << 1e9, -1e9, 0;
  CHECK(tree.predict(x) == 5.0);
}

TEST_CASE("per-node SSE never increases through a split") {
  Rng data_rng(17);
  const Index n = 120;
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 3; ++k) x(i, k) = 10.0 * data_rng.uniform();
    y[i] = x(i, 0) + std::sin(x(i, 1)) + 0.3 * data_rng.normal();
  }
  Rng rng(1);
  const auto tree = grow_tree<double>(x, y, GrowConfig{6, 3}, rng);

  // recompute SSE per node by routing rows
  const auto leaves = leaf_assignment(tree, x);
  std::vector<std::vector<Index>> node_rows(tree.nodes.size());
  for (Index i = 0; i < n; ++i) {
    Index id = 0;
    node_rows[0].push_back(i);
    while (tree.nodes[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& nd = tree.nodes[static_cast<std::size_t>(id)];
      id = x(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
      node_rows[static_cast<std::size_t>(id)].push_back(i);
    }
  }
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& nd = tree.nodes[id];
    if (nd.feature < 0) continue;
    const double parent = oracle::two_pass_sse(y, node_rows[id]);
    const double child_sum =
        oracle::two_pass_sse(y, node_rows[static_cast<std::size_t>(nd.left)]) +
        oracle::two_pass_sse(y, node_rows[static_cast<std::size_t>(nd.right)]);
    CHECK(child_sum <= parent + 1e-9 * (1.0 + parent));
  }
  CHECK(leaves.size() == static_cast<std::size_t>(n));
}

TEST_CASE("fully grown tree on distinct features drives training error to zero") {
  Rng data_rng(23);
  const Index n = 64;
  Eigen::MatrixXd x(n, kNumFeatures);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < kNumFeatures; ++k) x(i, k) = data_rng.normal();
    y[i] = data_rng.normal();
  }
  Rng rng(9);
  const auto tree = grow_tree<double>(x, y, GrowConfig{2, kNumFeatures}, rng);
  for (Index i = 0; i < n; ++i) {
    CHECK(tree.predict(x.row(i)) == doctest::Approx(y[i]).epsilon(1e-12));
  }
}

TEST_CASE("strictly increasing feature transforms preserve the partition") {
  Rng data_rng(29);
  const Index n = 60;
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < 4; ++k) x(i, k) = 4.0 * (data_rng.uniform() - 0.5);
    y[i] = 2.0 * x(i, 0) - x(i, 2) * x(i, 2) + 0.2 * data_rng.normal();
  }
  Eigen::MatrixXd xt = x;
  for (Index i = 0; i < n; ++i) xt(i, 1) = std::pow(x(i, 1), 3);  // monotone

  Rng rng_a(7), rng_b(7);
  const auto tree_a = grow_tree<double>(x, y, GrowConfig{4, 2}, rng_a);
  const auto tree_b = grow_tree<double>(xt, y, GrowConfig{4, 2}, rng_b);

  const auto leaves_a = leaf_assignment(tree_a, x);
  const auto leaves_b = leaf_assignment(tree_b, xt);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool same_a = leaves_a[static_cast<std::size_t>(i)] ==
                          leaves_a[static_cast<std::size_t>(j)];
      const bool same_b = leaves_b[static_cast<std::size_t>(i)] ==
                          leaves_b[static_cast<std::size_t>(j)];
      CHECK(same_a == same_b);
    }
  }
}

TEST_CASE("grown trees match the brute-force reference on training rows") {
  Rng meta(101);
  for (int inst = 0; inst < 25; ++inst) {
    const Index n = 5 + static_cast<Index>(meta.below(46));
    const int k = 1 + static_cast<int>(meta.below(4));
    const Index min_parent = 2 + static_cast<Index>(meta.below(7));
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (Index i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) x(i, c) = 10.0 * meta.uniform();
      y[i] = 10.0 * meta.uniform();
    }
    Rng rng(0);
    const auto tree = grow_tree<double>(x, y, GrowConfig{min_parent, k}, rng);
    const auto ref = oracle::brute_grow(x, y, min_parent);
    for (Index i = 0; i < n; ++i) {
      CHECK(tree.predict(x.row(i)) == ref.fitted.at(i));
    }
  }
}

TEST_CASE("dump renders one line per node") {
  Eigen::MatrixXd x(4, 1);
  x << 1, 2, 3, 4;
  Eigen::VectorXd y(4);
  y << 0, 0, 10, 10;
  Rng rng(0);
  const auto tree = grow_tree<double>(x, y, GrowConfig{2, 1}, rng);
  const std::string text = tree.dump({"speed"});
  CHECK(text.find("speed <= 2.5") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 3);
}

TEST_CASE("config validation") {
  const GrowConfig too_small{1, 2};
  CHECK_THROWS_AS(too_small.validate(), InvalidConfigError);
  const GrowConfig no_features{2, 0};
  CHECK_THROWS_AS(no_features.validate(), InvalidConfigError);
}
