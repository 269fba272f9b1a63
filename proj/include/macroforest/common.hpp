#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

namespace macroforest {

template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

inline constexpr int kNumFeatures = 6;

// Fixed feature order used everywhere: column k of a dataset matrix is
// feature_order[k].
inline constexpr const char* kFeatureNames[kNumFeatures] = {
    "lagged_inflation", "expectation_12m", "output_gap",
    "oil_change",       "neer_change",     "global_ppi",
};

enum Feature : int {
  kLaggedInflation = 0,
  kExpectation12m = 1,
  kOutputGap = 2,
  kOilChange = 3,
  kNeerChange = 4,
  kGlobalPpi = 5,
};

template <typename Scalar>
constexpr Scalar nan_value() {
  return std::numeric_limits<Scalar>::quiet_NaN();
}

inline double nan_d() { return nan_value<double>(); }

}  // namespace macroforest
