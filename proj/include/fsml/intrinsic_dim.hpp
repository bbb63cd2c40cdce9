#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fsml/curve.hpp"

namespace fsml::geometry {

struct IntrinsicDimEstimate {
  int dimension = 0;           // round(raw) clamped to [1, 10]
  double raw = 0.0;            // unrounded slope
  std::vector<double> ratios;  // r2/r1 per point, NaN where undefined
  std::size_t valid = 0;       // points with two positive neighbour distances
  std::size_t used = 0;        // after trimming the largest 10% of ratios
};

/// Two-nearest-neighbour estimator: mu_i = r2(i)/r1(i) over positive
/// distances. With the ratios sorted and the largest 10% discarded, d is the
/// slope of -log(1 - i/n') against log mu_(i) through the origin.
IntrinsicDimEstimate estimate_intrinsic_dim(const Eigen::MatrixXd& distances);
IntrinsicDimEstimate estimate_intrinsic_dim(const fda::CurveSet& curves);

}  // namespace fsml::geometry
