#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace fsml::embedding {

/// Label-penalized geodesic proximities.
struct ProximityMatrix {
  Eigen::MatrixXd values;  // symmetric, zero diagonal
  double xi = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
};

/// D(i, j) = d(i, j) + xi * [y_i != y_j] / (d(i, j) + sqrt(xi)).
ProximityMatrix penalized_proximity(const Eigen::MatrixXd& distances, std::span<const int> labels, double xi);

struct Embedding {
  Eigen::MatrixXd coords;       // n x d, centred, columns by descending eigenvalue
  Eigen::VectorXd eigenvalues;  // all n eigenvalues of the centred Gram matrix, descending
  double epsilon_mds = 0.0;     // max over pairs |D(i,j) - ||z_i - z_j|||
  double clipped_mass = 0.0;    // sum of |negative eigenvalues|

  std::size_t dim() const { return static_cast<std::size_t>(coords.cols()); }
};

/// Classical (Torgerson) scaling of a dissimilarity matrix into R^d.
/// Negative retained eigenvalues are clipped to zero; every column is signed so
/// its largest-magnitude entry is positive.
Embedding classical_mds(const Eigen::MatrixXd& dissimilarities, std::size_t d);
inline Embedding classical_mds(const ProximityMatrix& prox, std::size_t d) { return classical_mds(prox.values, d); }

/// Max over pairs of |D(i,j) - ||z_i - z_j|||.
double embedding_discrepancy(const Eigen::MatrixXd& dissimilarities, const Eigen::MatrixXd& coords);

struct ProcrustesFit {
  Eigen::MatrixXd aligned;  // source mapped onto target
  double max_error = 0.0;   // max row-wise Euclidean error after alignment
  double rms_error = 0.0;
};

/// Orthogonal Procrustes alignment (rotation/reflection plus translation, no
/// scaling) of `source` onto `target`, both n x d.
ProcrustesFit procrustes_align(const Eigen::MatrixXd& source, const Eigen::MatrixXd& target);

}  // namespace fsml::embedding
