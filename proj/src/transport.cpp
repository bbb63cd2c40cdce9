#include "fsml/transport.hpp"

#include <sstream>

#include "fsml/diagnostics.hpp"
#include "fsml/error.hpp"

namespace fsml::geometry {

Eigen::MatrixXd transport_operator(const TangentFrame& from, const TangentFrame& to) {
  if (from.dim() != to.dim())
    throw ParameterError("transport between frames of different dimension (" + std::to_string(from.dim()) +
                         " vs " + std::to_string(to.dim()) + ")");
  if (from.basis.cols() != to.basis.cols()) throw GridMismatchError("frames live on different grids");
  const Eigen::MatrixXd phi = from.weighted_basis * to.basis.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smallest = svd.singularValues().minCoeff();
  if (smallest < 1e-12) {
    std::ostringstream msg;
    msg << "tangent spaces nearly orthogonal (smallest singular value " << smallest << "); transport is ill-defined";
    warn(msg.str());
  }
  return svd.matrixV() * svd.matrixU().transpose();
}

}  // namespace fsml::geometry
