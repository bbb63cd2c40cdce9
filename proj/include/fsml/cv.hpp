#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fsml/curve.hpp"
#include "fsml/geodesic.hpp"
#include "fsml/heads.hpp"
#include "fsml/kernel.hpp"

namespace fsml::tuning {

struct CvPlan {
  std::size_t folds = 10;
  std::vector<double> xi_grid;  // ascending, nonnegative
  std::vector<double> h_grid;   // ascending, positive
  std::uint64_t seed = 0;
  bool stratify = true;

  void validate() const;
};

/// Settings of the coordinate-map regression used inside the CV loops.
struct RegressionSettings {
  fda::Kernel kernel;
  std::size_t k_pca = 15;
  std::size_t d = 2;
  std::optional<double> ridge;  // default n^-3 of each training subset
};

/// One (xi, outer fold) cell.
struct CvCell {
  double xi = 0.0;
  std::size_t fold = 0;
  std::size_t misclassifications = 0;
  double h_inner = 0.0;
  std::vector<double> inner_losses;  // per h grid value
};

struct CvResult {
  double xi = 0.0;
  double h_reg = 0.0;
  std::vector<double> xi_grid;
  std::vector<double> h_grid;
  std::vector<std::size_t> xi_losses;  // misclassifications summed over folds
  std::vector<CvCell> cells;           // xi-major, then fold
  std::size_t evaluated = 0;           // held-out predictions per xi
};

/// Partition of [0, n) into `folds` index lists with sizes differing by at
/// most one. Stratified: each class is shuffled and dealt round-robin. Plain
/// splits that leave a fold with a single label are re-stratified; if that
/// also fails a FoldConstructionError is raised.
std::vector<std::vector<std::size_t>> make_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed,
                                                 bool stratify);

/// Linear-interpolation sample quantile of the strictly upper-triangular
/// entries of a symmetric matrix.
double offdiagonal_quantile(const Eigen::MatrixXd& m, double p);

/// xi values whose square roots are {0, q25, q50, q75, q90} of the
/// off-diagonal geodesic distances.
std::vector<double> default_xi_grid(const Eigen::MatrixXd& geodesic);
/// Five log-spaced values from the median nearest-neighbour L2 distance to
/// the median pairwise L2 distance.
std::vector<double> default_h_grid(const Eigen::MatrixXd& l2_distances);

/// Nested L-fold selection of (xi, h_reg). Outer folds score xi by
/// misclassifications of the head trained on the fold embedding; inner folds
/// choose h_reg by the squared embedding-regression error. Geodesic distances
/// are computed once on the whole sample and restricted per fold. Returns one
/// result per head; all heads share folds, embeddings and inner choices.
std::vector<CvResult> nested_cv_select(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                                       const CvPlan& plan, std::span<const classify::HeadSpec> heads,
                                       const RegressionSettings& settings);

CvResult nested_cv_select(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                          const CvPlan& plan, const classify::HeadSpec& head, const RegressionSettings& settings);

struct BandwidthChoice {
  double h = 0.0;
  std::vector<double> losses;  // per h grid value
};

/// Single-level L-fold choice of h_reg for a fixed xi: the embedding of the
/// whole sample is regressed out of fold and scored by squared error.
/// Uses plan.h_grid, plan.folds, plan.seed and plan.stratify.
BandwidthChoice select_bandwidth(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                                 double xi, const CvPlan& plan, const RegressionSettings& settings);

}  // namespace fsml::tuning
