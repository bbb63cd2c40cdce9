#include "fsml/intrinsic_dim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsml/error.hpp"

namespace fsml::geometry {

IntrinsicDimEstimate estimate_intrinsic_dim(const Eigen::MatrixXd& distances) {
  const std::size_t n = static_cast<std::size_t>(distances.rows());
  if (n < 20) throw PreconditionError("intrinsic dimension estimation needs n >= 20, got " + std::to_string(n));

  IntrinsicDimEstimate est;
  est.ratios.assign(n, std::numeric_limits<double>::quiet_NaN());
  std::vector<double> logs;
  for (std::size_t i = 0; i < n; ++i) {
    double r1 = std::numeric_limits<double>::infinity();
    double r2 = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double r = distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (!(r > 0.0)) continue;
      if (r < r1) {
        r2 = r1;
        r1 = r;
      } else if (r < r2) {
        r2 = r;
      }
    }
    if (!std::isfinite(r2)) continue;
    est.ratios[i] = r2 / r1;
    logs.push_back(std::log(r2 / r1));
  }
  est.valid = logs.size();
  if (est.valid < 10)
    throw InsufficientDataError("intrinsic dimension needs at least 10 points with two distinct neighbours, got " +
                                std::to_string(est.valid));

  // Facco's fit: mu is Pareto(d), so -log(1 - F(mu)) = d log mu.
  // Least squares through the origin on the smallest 90% of the sorted ratios,
  // F taken as the empirical cdf i/n' over all valid points.
  std::sort(logs.begin(), logs.end());
  est.used = est.valid - est.valid / 10;
  const double total = static_cast<double>(est.valid);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < est.used; ++i) {
    const double y = -std::log1p(-static_cast<double>(i + 1) / total);
    sxy += logs[i] * y;
    sxx += logs[i] * logs[i];
  }
  est.raw = sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::infinity();
  est.dimension = std::isfinite(est.raw) ? static_cast<int>(std::clamp(std::lround(est.raw), 1L, 10L)) : 10;
  return est;
}

IntrinsicDimEstimate estimate_intrinsic_dim(const fda::CurveSet& curves) {
  return estimate_intrinsic_dim(fda::pairwise_l2_distances(curves));
}

}  // namespace fsml::geometry
