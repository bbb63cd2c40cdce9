#include "fsml/local_pca.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fsml/diagnostics.hpp"
#include "fsml/error.hpp"
#include "fsml/graph.hpp"
#include "fsml/parallel.hpp"

namespace fsml::geometry {
namespace {

void check_sizes(std::size_t n, std::size_t k_pca, std::size_t d) {
  if (d < 1) throw PreconditionError("tangent dimension must be at least 1");
  if (k_pca < d + 1)
    throw PreconditionError("k_pca must be at least d + 1 (k_pca=" + std::to_string(k_pca) +
                            ", d=" + std::to_string(d) + ")");
  if (k_pca > n)
    throw PreconditionError("k_pca exceeds the number of curves (k_pca=" + std::to_string(k_pca) +
                            ", n=" + std::to_string(n) + ")");
}

void fix_sign(Eigen::Ref<Eigen::RowVectorXd> phi) {
  Eigen::Index arg = 0;
  phi.cwiseAbs().maxCoeff(&arg);
  if (phi[arg] < 0.0) phi = -phi;
}

}  // namespace

TangentFrame frame_from_neighbors(const fda::CurveSet& curves, std::vector<std::size_t> neighbors, std::size_t d) {
  const std::size_t k = neighbors.size();
  check_sizes(curves.size(), k, d);
  const auto& sw = curves.grid->sqrt_weights();
  const Eigen::Index G = static_cast<Eigen::Index>(curves.grid->size());

  TangentFrame frame;
  Eigen::MatrixXd local(static_cast<Eigen::Index>(k), G);
  for (std::size_t r = 0; r < k; ++r)
    local.row(static_cast<Eigen::Index>(r)) = curves.values.row(static_cast<Eigen::Index>(neighbors[r]));
  frame.local_mean = local.colwise().mean().transpose();
  // Centered rows in sqrt-weight coordinates, where quadrature is a dot product.
  const Eigen::MatrixXd centered = (local.rowwise() - frame.local_mean.transpose()) * sw.asDiagonal();
  const Eigen::MatrixXd gram = centered * centered.transpose() / static_cast<double>(k);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  const Eigen::VectorXd ascending = eig.eigenvalues();
  frame.eigenvalues = ascending.reverse().cwiseMax(0.0);
  const double top = std::max(frame.eigenvalues[0], 0.0);
  if (d < k && std::abs(frame.eigenvalues[static_cast<Eigen::Index>(d) - 1] -
                        frame.eigenvalues[static_cast<Eigen::Index>(d)]) <= 1e-12 * std::max(top, 1e-300)) {
    std::ostringstream msg;
    msg << "local PCA eigenvalues " << d << " and " << d + 1 << " coincide; tangent frame is not unique";
    warn(msg.str());
  }

  Eigen::MatrixXd ortho(static_cast<Eigen::Index>(d), G);  // rows orthonormal in sqrt-weight space
  std::size_t filled = 0;
  for (; filled < d; ++filled) {
    const Eigen::Index col = static_cast<Eigen::Index>(k - 1 - filled);
    const double lambda = ascending[col];
    if (!(lambda > 1e-14 * std::max(top, 1e-300)) || lambda <= 0.0) break;
    Eigen::RowVectorXd phi = (centered.transpose() * eig.eigenvectors().col(col)).transpose();
    phi /= phi.norm();
    ortho.row(static_cast<Eigen::Index>(filled)) = phi;
  }
  if (filled < d) {
    warn("local covariance has rank " + std::to_string(filled) + " < d=" + std::to_string(d) +
         "; completing the tangent frame deterministically");
    // Gram-Schmidt over grid indicator directions.
    for (Eigen::Index g = 0; g < G && filled < d; ++g) {
      Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(G);
      v[g] = 1.0;
      for (std::size_t r = 0; r < filled; ++r) {
        const auto row = ortho.row(static_cast<Eigen::Index>(r));
        v -= v.dot(row) * row;
      }
      const double nv = v.norm();
      if (nv < 1e-8) continue;
      ortho.row(static_cast<Eigen::Index>(filled++)) = v / nv;
    }
  }

  frame.basis.resize(static_cast<Eigen::Index>(d), G);
  for (std::size_t r = 0; r < d; ++r) {
    Eigen::RowVectorXd phi = ortho.row(static_cast<Eigen::Index>(r)).cwiseQuotient(sw.transpose());
    fix_sign(phi);
    frame.basis.row(static_cast<Eigen::Index>(r)) = phi;
  }
  frame.weighted_basis = frame.basis * curves.grid->weights().asDiagonal();
  frame.neighbors = std::move(neighbors);
  return frame;
}

TangentFrame local_pca(const fda::CurveSet& curves, std::size_t anchor, std::size_t k_pca, std::size_t d) {
  check_sizes(curves.size(), k_pca, d);
  if (anchor >= curves.size()) throw ParameterError("anchor vertex out of range");
  const Eigen::MatrixXd y = curves.weighted();
  const Eigen::VectorXd dist = (y.rowwise() - y.row(static_cast<Eigen::Index>(anchor))).rowwise().norm();
  std::vector<std::size_t> nbrs{anchor};
  for (std::size_t j : nearest_indices(dist, k_pca - 1, anchor)) nbrs.push_back(j);
  TangentFrame f = frame_from_neighbors(curves, std::move(nbrs), d);
  f.anchor = anchor;
  return f;
}

TangentFrame local_pca(const fda::CurveSet& curves, const fda::Curve& anchor, std::size_t k_pca, std::size_t d) {
  check_sizes(curves.size(), k_pca, d);
  fda::require_same_grid(curves.grid, anchor.grid());
  const Eigen::MatrixXd y = curves.weighted();
  const Eigen::RowVectorXd x = anchor.values().cwiseProduct(curves.grid->sqrt_weights()).transpose();
  const Eigen::VectorXd dist = (y.rowwise() - x).rowwise().norm();
  return frame_from_neighbors(curves, nearest_indices(dist, k_pca), d);
}

std::vector<TangentFrame> tangent_frames(const fda::CurveSet& curves, const Eigen::MatrixXd& distances,
                                         std::size_t k_pca, std::size_t d) {
  const std::size_t n = curves.size();
  check_sizes(n, k_pca, d);
  std::vector<TangentFrame> frames(n);
  parallel_for(n, [&](std::size_t i) {
    std::vector<std::size_t> nbrs{i};
    for (std::size_t j : nearest_indices(distances.col(static_cast<Eigen::Index>(i)), k_pca - 1, i))
      nbrs.push_back(j);
    frames[i] = frame_from_neighbors(curves, std::move(nbrs), d);
    frames[i].anchor = i;
  });
  return frames;
}

std::size_t suggested_k_pca(std::size_t n, std::size_t d) {
  return static_cast<std::size_t>(
      std::lround(std::pow(static_cast<double>(n), 2.0 / (static_cast<double>(d) + 2.0))));
}

}  // namespace fsml::geometry
