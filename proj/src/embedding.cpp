#include "fsml/embedding.hpp"

#include <cmath>

#include "fsml/error.hpp"

namespace fsml::embedding {

ProximityMatrix penalized_proximity(const Eigen::MatrixXd& distances, std::span<const int> labels, double xi) {
  if (!(xi >= 0.0) || !std::isfinite(xi)) throw ParameterError("xi must be a nonnegative finite number");
  const Eigen::Index n = distances.rows();
  if (distances.cols() != n) throw ParameterError("distance matrix must be square");
  if (static_cast<Eigen::Index>(labels.size()) != n) throw ParameterError("one label per row required");
  ProximityMatrix out{distances, xi};
  if (xi == 0.0) return out;
  const double root = std::sqrt(xi);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i, i) = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(j)])
        out.values(i, j) = distances(i, j) + xi / (distances(i, j) + root);
  }
  return out;
}

double embedding_discrepancy(const Eigen::MatrixXd& dissimilarities, const Eigen::MatrixXd& coords) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < coords.rows(); ++i)
    for (Eigen::Index j = i + 1; j < coords.rows(); ++j)
      worst = std::max(worst, std::abs(dissimilarities(i, j) - (coords.row(i) - coords.row(j)).norm()));
  return worst;
}

Embedding classical_mds(const Eigen::MatrixXd& dissimilarities, std::size_t d) {
  const Eigen::Index n = dissimilarities.rows();
  if (dissimilarities.cols() != n) throw ParameterError("dissimilarity matrix must be square");
  if (d < 1 || static_cast<Eigen::Index>(d) > n - 1)
    throw ParameterError("MDS dimension must lie in [1, n-1] (d=" + std::to_string(d) + ", n=" + std::to_string(n) +
                         ")");

  // B = -1/2 J D^2 J with J = I - 11^T/n, formed by explicit double centring.
  const Eigen::MatrixXd sq = dissimilarities.array().square().matrix();
  const Eigen::VectorXd row_mean = sq.rowwise().mean();
  const Eigen::VectorXd col_mean = sq.colwise().mean().transpose();
  const double grand = sq.mean();
  Eigen::MatrixXd b(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b(i, j) = -0.5 * (sq(i, j) - row_mean[i] - col_mean[j] + grand);
  b = 0.5 * (b + b.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(b);
  Embedding out;
  out.eigenvalues = eig.eigenvalues().reverse();
  for (Eigen::Index k = 0; k < n; ++k)
    if (out.eigenvalues[k] < 0.0) out.clipped_mass -= out.eigenvalues[k];

  const auto dd = static_cast<Eigen::Index>(d);
  out.coords.resize(n, dd);
  for (Eigen::Index c = 0; c < dd; ++c) {
    const double lambda = std::max(out.eigenvalues[c], 0.0);
    Eigen::VectorXd col = eig.eigenvectors().col(n - 1 - c) * std::sqrt(lambda);
    col.array() -= col.mean();
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0.0) col = -col;
    out.coords.col(c) = col;
  }
  out.epsilon_mds = embedding_discrepancy(dissimilarities, out.coords);
  return out;
}

ProcrustesFit procrustes_align(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target) {
  if (source.rows() != target.rows() || source.cols() != target.cols())
    throw ParameterError("Procrustes inputs must have equal shapes");
  const Eigen::RowVectorXd ms = source.colwise().mean();
  const Eigen::RowVectorXd mt = target.colwise().mean();
  const Eigen::MatrixXd a = source.rowwise() - ms;
  const Eigen::MatrixXd b = target.rowwise() - mt;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::MatrixXd rot = svd.matrixU() * svd.matrixV().transpose();
  ProcrustesFit fit;
  fit.aligned = (a * rot).rowwise() + mt;
  const Eigen::VectorXd err = (fit.aligned - target).rowwise().norm();
  fit.max_error = err.size() ? err.maxCoeff() : 0.0;
  fit.rms_error = err.size() ? std::sqrt(err.squaredNorm() / static_cast<double>(err.size())) : 0.0;
  return fit;
}

}  // namespace fsml::embedding
