#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "macroforest/hp_filter.hpp"
#include "macroforest/rng.hpp"
#include "macroforest/stats.hpp"
#include "oracles.hpp"

using namespace macroforest;

namespace {

Eigen::VectorXd random_series(Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = scale * rng.normal();
  return y;
}

double second_diff_variance(const Eigen::VectorXd& tau) {
  double acc = 0;
  for (Index t = 1; t + 1 < tau.size(); ++t) {
    const double d2 = tau[t + 1] - 2.0 * tau[t] + tau[t - 1];
    acc += d2 * d2;
  }
  return acc / double(tau.size() - 2);
}

}  // namespace

TEST_CASE("linear series is its own trend for any lambda") {
  Eigen::VectorXd y(40);
  for (Index t = 0; t < y.size(); ++t) y[t] = 3.0 + 0.7 * double(t);
  for (double lambda : {1.0, 100.0, 1600.0, 129600.0}) {
    const Eigen::VectorXd tau = hp_trend<double>(y, lambda);
    CHECK((tau - y).cwiseAbs().maxCoeff() < 1e-8 * y.norm());
  }
}

TEST_CASE("lambda -> 0 limit returns the series") {
  const Eigen::VectorXd y = random_series(80, 7);
  const Eigen::VectorXd tau = hp_trend<double>(y, 1e-8);
  CHECK((tau - y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pentadiagonal solve matches dense oracle") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd y = random_series(100, seed, 2.0);
    const Eigen::VectorXd tau = hp_trend<double>(y, 1600.0);
    const Eigen::VectorXd ref = oracle::dense_hp_trend(y, 1600.0);
    CHECK((tau - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("trend mean equals series mean") {
  const Eigen::VectorXd y = random_series(90, 11, 5.0);
  const Eigen::VectorXd tau = hp_trend<double>(y, 1600.0);
  CHECK(std::abs(tau.mean() - y.mean()) < 1e-8 * (1.0 + std::abs(y.mean())));
}

TEST_CASE("larger lambda means smoother trend") {
  const Eigen::VectorXd y = random_series(120, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (double lambda : {100.0, 1600.0, 129600.0}) {
    const double v = second_diff_variance(hp_trend<double>(y, lambda));
    CHECK(v <= prev * (1.0 + 1e-12));
    prev = v;
  }
}

TEST_CASE("series shorter than 4 points is rejected") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  CHECK_THROWS_AS(hp_trend<double>(y, 1600.0), SeriesTooShortError);
}

TEST_CASE("one-sided trend: linear series has zero cycle wherever defined") {
  Eigen::VectorXd y(40);
  for (Index t = 0; t < y.size(); ++t) y[t] = 10.0 + 0.3 * double(t);
  HpConfig cfg;
  const Eigen::VectorXd tau = hp_trend_one_sided<double>(y, cfg);
  for (Index t = 0; t < y.size(); ++t) {
    if (t < cfg.min_window - 1) {
      CHECK(std::isnan(tau[t]));
    } else {
      CHECK(std::abs(tau[t] - y[t]) < 1e-8 * y.norm());
    }
  }
}

TEST_CASE("one-sided trend matches prefix-loop oracle") {
  const Eigen::VectorXd y = random_series(60, 21);
  HpConfig cfg;
  const Eigen::VectorXd tau = hp_trend_one_sided<double>(y, cfg);
  const Eigen::VectorXd ref = oracle::dense_hp_one_sided(y, cfg.lambda, cfg.min_window);
  for (Index t = cfg.min_window - 1; t < y.size(); ++t) {
    CHECK(std::abs(tau[t] - ref[t]) < 1e-8);
  }
}

TEST_CASE("appending observations never changes emitted one-sided values") {
  const Eigen::VectorXd full = random_series(50, 33);
  HpConfig cfg;
  const Eigen::VectorXd head = hp_trend_one_sided<double>(full.head(35), cfg);
  const Eigen::VectorXd whole = hp_trend_one_sided<double>(full, cfg);
  for (Index t = cfg.min_window - 1; t < 35; ++t) {
    CHECK(whole[t] == head[t]);  // exact: same prefix, same solve
  }
}

TEST_CASE("one-sided rejects series shorter than the window") {
  HpConfig cfg;
  CHECK_THROWS_AS(hp_trend_one_sided<double>(random_series(10, 1), cfg),
                  SeriesTooShortError);
}

TEST_CASE("output gap is zero on exact exponential growth") {
  Eigen::VectorXd gdp(60);
  for (Index q = 0; q < gdp.size(); ++q) gdp[q] = 100.0 * std::exp(0.005 * double(q));
  HpConfig cfg;
  const Eigen::VectorXd gap = output_gap<double>(gdp, cfg);
  for (Index q = cfg.min_window - 1; q < gdp.size(); ++q) {
    CHECK(std::abs(gap[q]) < 1e-8);
  }
}

TEST_CASE("output gap recovers an injected cycle") {
  const Index n = 80;
  Eigen::VectorXd gdp(n), cycle(n);
  for (Index q = 0; q < n; ++q) {
    const double c = 0.02 * std::sin(2.0 * M_PI * double(q) / 12.0);
    cycle[q] = 100.0 * std::log(1.0 + c);
    gdp[q] = 100.0 * std::exp(0.005 * double(q)) * (1.0 + c);
  }
  HpConfig cfg;
  const Eigen::VectorXd gap = output_gap<double>(gdp, cfg);
  const Index first = cfg.min_window - 1;
  const Index m = n - first;
  VecX<double> a = gap.segment(first, m);
  VecX<double> b = cycle.segment(first, m);
  CHECK(pearson<double>(a, b) > 0.8);
}

TEST_CASE("output gap rejects non-positive levels") {
  Eigen::VectorXd gdp = Eigen::VectorXd::Constant(20, 5.0);
  gdp[4] = 0.0;
  CHECK_THROWS_AS(output_gap<double>(gdp, HpConfig{}), NonPositiveIndexError);
}

TEST_CASE("filter is usable with float scalars") {
  Eigen::VectorXf y(30);
  for (Index t = 0; t < y.size(); ++t) {
    y[t] = float(t) * 0.5f + std::sin(float(t));
  }
  const Eigen::VectorXf tau = hp_trend<float>(y, 1600.0f);
  const Eigen::VectorXd ref = oracle::dense_hp_trend(y.cast<double>(), 1600.0);
  CHECK((tau.cast<double>() - ref).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("config validation") {
  HpConfig cfg;
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfigError);
  cfg.lambda = 1600.0;
  cfg.min_window = 4;
  CHECK_THROWS_AS(cfg.validate(), InvalidConfigError);
}
