#include "fsml/curve.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fsml/error.hpp"

namespace fsml::fda {

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < kMinPoints)
    throw ParameterError("grid needs at least " + std::to_string(kMinPoints) + " points, got " +
                         std::to_string(points_.size()));
  for (std::size_t g = 0; g < points_.size(); ++g) {
    if (!std::isfinite(points_[g])) throw ParameterError("grid point is not finite");
    if (g > 0 && !(points_[g] > points_[g - 1])) throw ParameterError("grid must be strictly increasing");
  }
  const auto G = static_cast<Eigen::Index>(points_.size());
  weights_ = Eigen::VectorXd::Zero(G);
  for (Eigen::Index g = 0; g + 1 < G; ++g) {
    const double half = 0.5 * (points_[g + 1] - points_[g]);
    weights_[g] += half;
    weights_[g + 1] += half;
  }
  sqrt_weights_ = weights_.cwiseSqrt();
}

std::shared_ptr<const Grid> Grid::uniform(double a, double b, std::size_t points) {
  if (!(b > a)) throw ParameterError("grid requires a < b");
  if (points < 2) throw ParameterError("grid needs at least 2 points");
  std::vector<double> p(points);
  const double step = (b - a) / static_cast<double>(points - 1);
  for (std::size_t g = 0; g < points; ++g) p[g] = a + step * static_cast<double>(g);
  p.back() = b;
  return std::make_shared<const Grid>(std::move(p));
}

double Grid::max_spacing() const {
  double s = 0.0;
  for (std::size_t g = 1; g < points_.size(); ++g) s = std::max(s, points_[g] - points_[g - 1]);
  return s;
}

void require_same_grid(const GridPtr& lhs, const GridPtr& rhs) {
  if (!lhs || !rhs) throw GridMismatchError("curve without grid");
  if (lhs == rhs) return;
  if (!(*lhs == *rhs)) throw GridMismatchError("curves live on different grids");
}

Curve::Curve(GridPtr grid, Eigen::VectorXd values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw ParameterError("curve requires a grid");
  if (static_cast<std::size_t>(values_.size()) != grid_->size())
    throw GridMismatchError("curve has " + std::to_string(values_.size()) + " values for a grid of " +
                            std::to_string(grid_->size()) + " points");
  if (!values_.allFinite()) throw ParameterError("curve values must be finite");
}

Curve Curve::constant(GridPtr grid, double value) {
  const auto G = static_cast<Eigen::Index>(grid->size());
  return Curve(std::move(grid), Eigen::VectorXd::Constant(G, value));
}

Curve Curve::operator-(const Curve& rhs) const {
  require_same_grid(grid_, rhs.grid_);
  return Curve(grid_, values_ - rhs.values_);
}

Curve Curve::operator+(const Curve& rhs) const {
  require_same_grid(grid_, rhs.grid_);
  return Curve(grid_, values_ + rhs.values_);
}

double trapezoid_inner_product(const Curve& f, const Curve& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& w = f.grid()->weights();
  const auto& a = f.values();
  const auto& b = g.values();
  double acc = 0.0;
  // w * (a*b) keeps the result bitwise symmetric in (f, g).
  for (Eigen::Index k = 0; k < a.size(); ++k) acc += w[k] * (a[k] * b[k]);
  return acc;
}

double l2_norm(const Curve& f) { return std::sqrt(std::max(0.0, trapezoid_inner_product(f, f))); }

double l2_distance(const Curve& f, const Curve& g) {
  require_same_grid(f.grid(), g.grid());
  const auto& w = f.grid()->weights();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const double d = f.values()[k] - g.values()[k];
    acc += w[k] * (d * d);
  }
  return std::sqrt(acc);
}

void SampledCurve::validate() const {
  if (times.size() != values.size())
    throw ParameterError("curve '" + id + "': times and values differ in length");
  if (times.size() < 2) throw InsufficientDataError("curve '" + id + "' has fewer than 2 observations");
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j]) || !std::isfinite(values[j]))
      throw ParameterError("curve '" + id + "' has non-finite observations");
    if (j > 0 && !(times[j] > times[j - 1]))
      throw ParameterError("curve '" + id + "': times must be strictly increasing");
  }
}

void SampledCurve::validate(double a, double b) const {
  validate();
  if (times.front() < a || times.back() > b)
    throw ParameterError("curve '" + id + "' has times outside [" + std::to_string(a) + ", " +
                         std::to_string(b) + "]");
}

Curve CurveSet::curve(std::size_t i) const {
  return Curve(grid, values.row(static_cast<Eigen::Index>(i)).transpose());
}

CurveSet CurveSet::subset(std::span<const std::size_t> rows) const {
  CurveSet out{grid, Eigen::MatrixXd(static_cast<Eigen::Index>(rows.size()), values.cols())};
  for (std::size_t r = 0; r < rows.size(); ++r)
    out.values.row(static_cast<Eigen::Index>(r)) = values.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

Eigen::MatrixXd CurveSet::weighted() const {
  return values * grid->sqrt_weights().asDiagonal();
}

CurveSet make_curve_set(const std::vector<Curve>& curves) {
  if (curves.empty()) throw ParameterError("empty curve list");
  CurveSet out{curves.front().grid(),
               Eigen::MatrixXd(static_cast<Eigen::Index>(curves.size()),
                               static_cast<Eigen::Index>(curves.front().grid()->size()))};
  for (std::size_t i = 0; i < curves.size(); ++i) {
    require_same_grid(out.grid, curves[i].grid());
    out.values.row(static_cast<Eigen::Index>(i)) = curves[i].values().transpose();
  }
  return out;
}

Eigen::MatrixXd pairwise_l2_distances(const CurveSet& curves) {
  const Eigen::MatrixXd y = curves.weighted();
  const Eigen::Index n = y.rows();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (y.row(i) - y.row(j)).norm();
  return d;
}

void LabeledDataset::validate() const {
  const std::size_t n = labels.size();
  if (n < 2) throw PreconditionError("dataset needs at least 2 curves, got " + std::to_string(n));
  if (curves.size() != n) throw ParameterError("dataset has mismatched curve and label counts");
  if (ids.size() != n) throw ParameterError("dataset has mismatched id and label counts");
  if (class_count < 1) throw ParameterError("dataset class_count must be positive");
  for (int y : labels)
    if (y < 0 || y >= class_count)
      throw ParameterError("label " + std::to_string(y) + " outside [0, " + std::to_string(class_count) + ")");
  if (!curves.values.allFinite()) throw ParameterError("dataset curves must be finite");
}

LabeledDataset make_dataset(std::vector<std::string> ids, CurveSet curves, std::vector<int> labels) {
  LabeledDataset ds;
  ds.ids = std::move(ids);
  ds.curves = std::move(curves);
  ds.labels = std::move(labels);
  ds.class_count = ds.labels.empty() ? 0 : *std::max_element(ds.labels.begin(), ds.labels.end()) + 1;
  ds.validate();
  return ds;
}

}  // namespace fsml::fda
