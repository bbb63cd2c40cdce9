#pragma once

#include <Eigen/Dense>
#include <optional>

#include "fsml/curve.hpp"
#include "fsml/kernel.hpp"

namespace fsml::interp {

/// Training curves with their embedding, ready for out-of-sample evaluation
/// by local-linear regression on the tangent space at the query.
struct CoordinateMapModel {
  fda::CurveSet curves;
  Eigen::MatrixXd coords;  // n x d
  fda::Kernel kernel;
  double bandwidth = 0.0;
  std::size_t k_pca = 15;
  double ridge = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(coords.cols()); }
  void validate() const;
};

/// Default ridge n^-3.
double default_regression_ridge(std::size_t n);

CoordinateMapModel make_coordinate_map(fda::CurveSet curves, Eigen::MatrixXd coords, fda::Kernel kernel,
                                       double bandwidth, std::size_t k_pca, std::optional<double> ridge = std::nullopt);

/// The bandwidth-independent part of one query: L2 distances to every
/// training curve and the training curves' tangent coordinates at the query.
struct QueryDesign {
  Eigen::VectorXd distances;       // n
  Eigen::MatrixXd tangent_coords;  // n x d, rows chi_i
};

QueryDesign prepare_query(const fda::CurveSet& training, const Eigen::Ref<const Eigen::VectorXd>& query,
                          std::size_t k_pca, std::size_t d);

/// Intercept of the kernel-weighted linear fit of `coords` on the tangent
/// coordinates, weights K(dist/h)/h^d. The ridge is added to the normal
/// matrix only when its smallest singular value falls below `ridge`.
Eigen::VectorXd evaluate_local_linear(const QueryDesign& design, const Eigen::MatrixXd& coords,
                                      const fda::Kernel& kernel, double bandwidth, double ridge);

Eigen::VectorXd interpolate_mu(const CoordinateMapModel& model, const fda::Curve& x);

/// Row q holds the estimate for query q; queries evaluated concurrently.
Eigen::MatrixXd interpolate_batch(const CoordinateMapModel& model, const fda::CurveSet& queries);

}  // namespace fsml::interp
