#pragma once

#include <Eigen/Dense>

#include "fsml/local_pca.hpp"

namespace fsml::geometry {

/// Approximate parallel transport from the tangent space of `from` to that of
/// `to`: with Phi(k, s) = <phi_from_k, phi_to_s> = U S V^T, returns V U^T.
/// Coordinates u in the `from` basis map to R * u in the `to` basis.
Eigen::MatrixXd transport_operator(const TangentFrame& from, const TangentFrame& to);

}  // namespace fsml::geometry
