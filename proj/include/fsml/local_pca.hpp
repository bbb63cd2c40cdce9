#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fsml/curve.hpp"

namespace fsml::geometry {

/// Orthonormal (under quadrature) basis of an estimated tangent space.
struct TangentFrame {
  std::optional<std::size_t> anchor;  // vertex index, empty for external points
  Eigen::MatrixXd basis;              // d x G eigenfunction values
  Eigen::MatrixXd weighted_basis;     // basis scaled by trapezoid weights
  Eigen::VectorXd local_mean;         // G values
  Eigen::VectorXd eigenvalues;        // local covariance spectrum, descending
  std::vector<std::size_t> neighbors;

  std::size_t dim() const { return static_cast<std::size_t>(basis.rows()); }
  /// Tangent coordinates <f, phi_k> of a curve given by its grid values.
  Eigen::VectorXd coordinates(const Eigen::Ref<const Eigen::VectorXd>& values) const {
    return weighted_basis * values;
  }
};

/// Frame from the local covariance of the listed curves (kernel trick on the
/// k x k Gram matrix). Eigenfunction signs make the largest-magnitude grid
/// value positive.
TangentFrame frame_from_neighbors(const fda::CurveSet& curves, std::vector<std::size_t> neighbors, std::size_t d);

/// Frame at a data vertex; the neighbourhood is the vertex and its
/// k_pca - 1 nearest other curves.
TangentFrame local_pca(const fda::CurveSet& curves, std::size_t anchor, std::size_t k_pca, std::size_t d);

/// Frame at an arbitrary curve on the same grid; the neighbourhood is its
/// k_pca nearest curves.
TangentFrame local_pca(const fda::CurveSet& curves, const fda::Curve& anchor, std::size_t k_pca, std::size_t d);

/// Frames at every vertex, computed from a precomputed L2 distance matrix.
std::vector<TangentFrame> tangent_frames(const fda::CurveSet& curves, const Eigen::MatrixXd& distances,
                                         std::size_t k_pca, std::size_t d);

/// Hint for k_pca: n^(2/(d+2)) rounded.
std::size_t suggested_k_pca(std::size_t n, std::size_t d);

}  // namespace fsml::geometry
