#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace fsml::fda {

/// Ordered evaluation points spanning [a, b] together with trapezoid weights.
/// Curves in one dataset share a single Grid instance.
class Grid {
 public:
  static constexpr std::size_t kMinPoints = 16;

  explicit Grid(std::vector<double> points);

  static std::shared_ptr<const Grid> uniform(double a, double b, std::size_t points);

  std::size_t size() const { return points_.size(); }
  double a() const { return points_.front(); }
  double b() const { return points_.back(); }
  double length() const { return b() - a(); }
  double max_spacing() const;

  std::span<const double> points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Elementwise square roots of the trapezoid weights.
  const Eigen::VectorXd& sqrt_weights() const { return sqrt_weights_; }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Throws GridMismatchError unless both grids are the same object or hold
/// bitwise identical points.
void require_same_grid(const GridPtr& lhs, const GridPtr& rhs);

/// A smooth function represented by its values on a shared grid.
class Curve {
 public:
  Curve(GridPtr grid, Eigen::VectorXd values);

  static Curve constant(GridPtr grid, double value);
  template <typename F>
  static Curve from_function(GridPtr grid, F&& f) {
    Eigen::VectorXd v(grid->size());
    for (std::size_t g = 0; g < grid->size(); ++g) v[g] = f(grid->points()[g]);
    return Curve(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }

  Curve operator-(const Curve& rhs) const;
  Curve operator+(const Curve& rhs) const;

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Trapezoid approximation of the L2 inner product; exactly symmetric.
double trapezoid_inner_product(const Curve& f, const Curve& g);
double l2_norm(const Curve& f);
double l2_distance(const Curve& f, const Curve& g);

/// One subject's raw observations before smoothing.
struct SampledCurve {
  std::string id;
  std::vector<double> times;
  std::vector<double> values;

  /// Checks len(times) == len(values) >= 2 and strictly increasing times,
  /// optionally inside [a, b].
  void validate() const;
  void validate(double a, double b) const;
};

/// n curves on a shared grid, stored row-wise.
struct CurveSet {
  GridPtr grid;
  Eigen::MatrixXd values;  // n x G

  std::size_t size() const { return static_cast<std::size_t>(values.rows()); }
  Curve curve(std::size_t i) const;
  CurveSet subset(std::span<const std::size_t> rows) const;

  /// Rows scaled by sqrt trapezoid weights: L2 geometry becomes Euclidean.
  Eigen::MatrixXd weighted() const;
};

CurveSet make_curve_set(const std::vector<Curve>& curves);

/// Symmetric matrix of pairwise L2 distances.
Eigen::MatrixXd pairwise_l2_distances(const CurveSet& curves);

struct LabeledDataset {
  std::vector<std::string> ids;
  CurveSet curves;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  /// n >= 2, labels in [0, class_count), one id per curve.
  void validate() const;
};

/// class_count inferred as max label + 1.
LabeledDataset make_dataset(std::vector<std::string> ids, CurveSet curves, std::vector<int> labels);

}  // namespace fsml::fda
