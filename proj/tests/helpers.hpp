#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "fsml/curve.hpp"

namespace testing {

inline fsml::fda::GridPtr unit_grid(std::size_t points = 101) { return fsml::fda::Grid::uniform(0.0, 1.0, points); }

// Curves c_i(t) = sum_k coef(i, k) * basis_k(t) on a shared grid.
template <typename Basis>
fsml::fda::CurveSet span_curves(const fsml::fda::GridPtr& grid, const Eigen::MatrixXd& coef, Basis basis) {
  fsml::fda::CurveSet set{grid, Eigen::MatrixXd::Zero(coef.rows(), static_cast<Eigen::Index>(grid->size()))};
  for (Eigen::Index i = 0; i < coef.rows(); ++i)
    for (std::size_t g = 0; g < grid->size(); ++g)
      for (Eigen::Index k = 0; k < coef.cols(); ++k)
        set.values(i, static_cast<Eigen::Index>(g)) += coef(i, k) * basis(static_cast<int>(k), grid->points()[g]);
  return set;
}

// Orthonormal in L2[0,1]: sqrt2 sin(2 pi (k+1) t).
inline double sine_basis(int k, double t) { return std::sqrt(2.0) * std::sin(2.0 * M_PI * (k + 1) * t); }

inline Eigen::MatrixXd random_points(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = g(rng);
  return m;
}

inline Eigen::MatrixXd euclidean_distances(const Eigen::MatrixXd& p) {
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = (p.row(i) - p.row(j)).norm();
  return d;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace testing
