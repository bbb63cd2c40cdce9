#include "fsml/coordinate_map.hpp"

#include <cmath>
#include <sstream>

#include "fsml/error.hpp"
#include "fsml/graph.hpp"
#include "fsml/local_pca.hpp"
#include "fsml/parallel.hpp"

namespace fsml::interp {

void CoordinateMapModel::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ParameterError("regression bandwidth must be positive");
  if (!(ridge >= 0.0)) throw ParameterError("regression ridge must be nonnegative");
  if (coords.rows() != curves.values.rows())
    throw ParameterError("embedding has " + std::to_string(coords.rows()) + " rows for " +
                         std::to_string(curves.size()) + " curves");
  if (coords.cols() < 1) throw ParameterError("embedding needs at least one column");
}

double default_regression_ridge(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 1.0 / (nn * nn * nn);
}

CoordinateMapModel make_coordinate_map(fda::CurveSet curves, Eigen::MatrixXd coords, fda::Kernel kernel,
                                       double bandwidth, std::size_t k_pca, std::optional<double> ridge) {
  CoordinateMapModel m;
  m.ridge = ridge.value_or(default_regression_ridge(curves.size()));
  m.curves = std::move(curves);
  m.coords = std::move(coords);
  m.kernel = kernel;
  m.bandwidth = bandwidth;
  m.k_pca = k_pca;
  m.validate();
  return m;
}

QueryDesign prepare_query(const fda::CurveSet& training, const Eigen::Ref<const Eigen::VectorXd>& query,
                          std::size_t k_pca, std::size_t d) {
  if (static_cast<std::size_t>(query.size()) != training.grid->size())
    throw GridMismatchError("query curve does not match the training grid");
  const auto& w = training.grid->weights();
  const Eigen::MatrixXd diff = training.values.rowwise() - query.transpose();
  QueryDesign design;
  design.distances = (diff * w.cwiseSqrt().asDiagonal()).rowwise().norm();
  const geometry::TangentFrame frame =
      geometry::frame_from_neighbors(training, geometry::nearest_indices(design.distances, k_pca), d);
  design.tangent_coords = diff * frame.weighted_basis.transpose();
  return design;
}

Eigen::VectorXd evaluate_local_linear(const QueryDesign& design, const Eigen::MatrixXd& coords,
                                      const fda::Kernel& kernel, double bandwidth, double ridge) {
  const Eigen::Index n = design.tangent_coords.rows();
  const Eigen::Index d = design.tangent_coords.cols();
  if (coords.rows() != n) throw ParameterError("embedding rows do not match the query design");
  if (!(bandwidth > 0.0)) throw ParameterError("regression bandwidth must be positive");

  const double scale = std::pow(bandwidth, static_cast<double>(d));
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(d + 1, d + 1);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(d + 1, coords.cols());
  Eigen::VectorXd row(d + 1);
  bool supported = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double wi = kernel(design.distances[i] / bandwidth) / scale;
    if (!(wi >= 1e-300)) continue;
    supported = true;
    row[0] = 1.0;
    row.tail(d) = design.tangent_coords.row(i).transpose();
    normal.noalias() += wi * row * row.transpose();
    rhs.noalias() += wi * row * coords.row(i);
  }
  if (!supported) {
    std::ostringstream msg;
    msg << "query lies outside the training support: nearest training curve at L2 distance "
        << design.distances.minCoeff() << " with bandwidth " << bandwidth;
    throw ExtrapolationError(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < ridge) normal.diagonal().array() += ridge;
  const Eigen::MatrixXd beta = normal.ldlt().solve(rhs);
  Eigen::VectorXd mu = beta.row(0).transpose();
  if (!mu.allFinite()) {
    // Rank-deficient without an engaged ridge (ridge == 0): fall back to the
    // minimum-norm solution.
    mu = normal.completeOrthogonalDecomposition().solve(rhs).row(0).transpose();
  }
  return mu;
}

Eigen::VectorXd interpolate_mu(const CoordinateMapModel& model, const fda::Curve& x) {
  fda::require_same_grid(model.curves.grid, x.grid());
  const QueryDesign design = prepare_query(model.curves, x.values(), model.k_pca, model.dim());
  return evaluate_local_linear(design, model.coords, model.kernel, model.bandwidth, model.ridge);
}

Eigen::MatrixXd interpolate_batch(const CoordinateMapModel& model, const fda::CurveSet& queries) {
  fda::require_same_grid(model.curves.grid, queries.grid);
  Eigen::MatrixXd out(queries.values.rows(), static_cast<Eigen::Index>(model.dim()));
  parallel_for(queries.size(), [&](std::size_t q) {
    const auto qi = static_cast<Eigen::Index>(q);
    const QueryDesign design = prepare_query(model.curves, queries.values.row(qi).transpose(), model.k_pca, model.dim());
    out.row(qi) = evaluate_local_linear(design, model.coords, model.kernel, model.bandwidth, model.ridge).transpose();
  });
  return out;
}

}  // namespace fsml::interp
