#include "fsml/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fsml/coordinate_map.hpp"
#include "fsml/embedding.hpp"
#include "fsml/error.hpp"
#include "fsml/parallel.hpp"
#include "fsml/rng.hpp"

namespace fsml::tuning {
namespace {

bool folds_mixed(std::span<const int> labels, const std::vector<std::vector<std::size_t>>& folds) {
  const std::set<int> all(labels.begin(), labels.end());
  if (all.size() < 2) return false;  // a single class can never be mixed
  for (const auto& f : folds) {
    std::set<int> seen;
    for (std::size_t i : f) seen.insert(labels[i]);
    if (seen.size() < 2) return false;
  }
  return true;
}

std::vector<std::vector<std::size_t>> deal(const std::vector<std::size_t>& order, std::size_t folds) {
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t p = 0; p < order.size(); ++p) out[p % folds].push_back(order[p]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<std::size_t> complement(std::size_t n, const std::vector<std::size_t>& fold) {
  std::vector<std::size_t> out;
  out.reserve(n - fold.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (k < fold.size() && fold[k] == i) {
      ++k;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

template <typename T>
std::vector<T> gather(std::span<const T> v, const std::vector<std::size_t>& idx) {
  std::vector<T> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t r = 0; r < idx.size(); ++r)
    out.row(static_cast<Eigen::Index>(r)) = m.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

/// Bandwidth-independent regression designs for one train/query split.
struct SplitDesigns {
  std::vector<std::size_t> train;  // positions in the parent index space
  std::vector<std::size_t> query;
  std::vector<interp::QueryDesign> designs;  // per query
};

SplitDesigns make_split(const fda::CurveSet& curves, std::vector<std::size_t> train, std::vector<std::size_t> query,
                        const RegressionSettings& s) {
  SplitDesigns out{std::move(train), std::move(query), {}};
  const fda::CurveSet training = curves.subset(out.train);
  out.designs.reserve(out.query.size());
  for (std::size_t q : out.query)
    out.designs.push_back(
        interp::prepare_query(training, curves.values.row(static_cast<Eigen::Index>(q)).transpose(), s.k_pca, s.d));
  return out;
}

/// Summed squared out-of-fold regression error of the embedding per bandwidth;
/// a bandwidth that fails to cover some query scores infinity.
std::vector<double> regression_losses(const std::vector<SplitDesigns>& splits, const Eigen::MatrixXd& z,
                                      const std::vector<double>& h_grid, const RegressionSettings& settings) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> losses(h_grid.size(), 0.0);
  for (const SplitDesigns& split : splits) {
    const Eigen::MatrixXd z_train = gather_rows(z, split.train);
    const double ridge = settings.ridge.value_or(interp::default_regression_ridge(split.train.size()));
    for (std::size_t q = 0; q < split.query.size(); ++q) {
      const auto target = z.row(static_cast<Eigen::Index>(split.query[q]));
      for (std::size_t h = 0; h < h_grid.size(); ++h) {
        if (!std::isfinite(losses[h])) continue;
        try {
          const Eigen::VectorXd mu =
              interp::evaluate_local_linear(split.designs[q], z_train, settings.kernel, h_grid[h], ridge);
          losses[h] += (mu - target.transpose()).squaredNorm();
        } catch (const ExtrapolationError&) {
          losses[h] = inf;
        }
      }
    }
  }
  return losses;
}

}  // namespace

void CvPlan::validate() const {
  if (folds < 2) throw ParameterError("cross-validation needs at least 2 folds");
  if (xi_grid.empty() || h_grid.empty()) throw ParameterError("cross-validation grids must be nonempty");
  for (std::size_t i = 0; i < xi_grid.size(); ++i) {
    if (!(xi_grid[i] >= 0.0) || !std::isfinite(xi_grid[i])) throw ParameterError("xi grid values must be >= 0");
    if (i > 0 && !(xi_grid[i] > xi_grid[i - 1])) throw ParameterError("xi grid must be strictly ascending");
  }
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0) || !std::isfinite(h_grid[i])) throw ParameterError("bandwidth grid values must be > 0");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1])) throw ParameterError("bandwidth grid must be strictly ascending");
  }
}

std::vector<std::vector<std::size_t>> make_folds(std::span<const int> labels, std::size_t folds, std::uint64_t seed,
                                                 bool stratify) {
  const std::size_t n = labels.size();
  if (folds < 2) throw FoldConstructionError("need at least 2 folds");
  if (folds > n)
    throw FoldConstructionError("cannot split " + std::to_string(n) + " items into " + std::to_string(folds) + " folds");
  Rng rng(seed);
  if (!stratify) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto plain = deal(order, folds);
    if (folds_mixed(labels, plain)) return plain;
  }
  std::vector<std::size_t> order;
  order.reserve(n);
  const int max_label = n ? *std::max_element(labels.begin(), labels.end()) : 0;
  for (int c = 0; c <= max_label; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (labels[i] == c) members.push_back(i);
    std::shuffle(members.begin(), members.end(), rng);
    order.insert(order.end(), members.begin(), members.end());
  }
  auto strat = deal(order, folds);
  if (std::set<int>(labels.begin(), labels.end()).size() < 2)
    throw FoldConstructionError("every label is identical; cross-validation needs two classes");
  if (!folds_mixed(labels, strat))
    throw FoldConstructionError("cannot build " + std::to_string(folds) +
                                " folds that each contain two classes; reduce the fold count");
  return strat;
}

double offdiagonal_quantile(const Eigen::MatrixXd& m, double p) {
  std::vector<double> v;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) v.push_back(m(i, j));
  if (v.empty()) throw InsufficientDataError("quantile of an empty matrix");
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::vector<double> default_xi_grid(const Eigen::MatrixXd& geodesic) {
  std::vector<double> grid{0.0};
  for (double p : {0.25, 0.5, 0.75, 0.9}) {
    const double q = offdiagonal_quantile(geodesic, p);
    const double xi = q * q;
    if (xi > grid.back()) grid.push_back(xi);
  }
  return grid;
}

std::vector<double> default_h_grid(const Eigen::MatrixXd& l2) {
  const double hi = offdiagonal_quantile(l2, 0.5);
  if (!(hi > 0.0)) throw InsufficientDataError("all curves coincide; cannot derive a bandwidth grid");
  // Lower end: median distance to the nearest other curve.
  std::vector<double> nearest;
  for (Eigen::Index i = 0; i < l2.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < l2.cols(); ++j)
      if (j != i && l2(i, j) > 0.0) best = std::min(best, l2(i, j));
    if (std::isfinite(best)) nearest.push_back(best);
  }
  std::sort(nearest.begin(), nearest.end());
  const double lo = nearest.empty() ? hi / 10.0 : nearest[nearest.size() / 2];
  if (!(hi > lo)) return {hi};
  std::vector<double> grid(5);
  for (int k = 0; k < 5; ++k) grid[static_cast<std::size_t>(k)] = lo * std::pow(hi / lo, k / 4.0);
  grid.back() = hi;
  return grid;
}

std::vector<CvResult> nested_cv_select(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                                       const CvPlan& plan, std::span<const classify::HeadSpec> heads,
                                       const RegressionSettings& settings) {
  data.validate();
  plan.validate();
  if (heads.empty()) throw ParameterError("at least one classifier head is required");
  const std::size_t n = data.size();
  if (geodesics.size() != n) throw ParameterError("geodesic matrix does not match the dataset");
  const std::span<const int> labels(data.labels);

  const auto outer = make_folds(labels, plan.folds, derive_seed(plan.seed, {0}), plan.stratify);
  const std::size_t L = outer.size();

  struct OuterFold {
    std::vector<std::size_t> train;
    std::vector<int> train_labels;
    SplitDesigns held_out;             // positions are global indices
    std::vector<SplitDesigns> inner;   // positions relative to `train`
  };
  std::vector<OuterFold> folds(L);
  parallel_for(L, [&](std::size_t l) {
    OuterFold& f = folds[l];
    f.train = complement(n, outer[l]);
    f.train_labels = gather(labels, f.train);
    f.held_out = make_split(data.curves, f.train, outer[l], settings);
    const fda::CurveSet train_curves = data.curves.subset(f.train);
    const auto inner = make_folds(f.train_labels, plan.folds, derive_seed(plan.seed, {1, l}), plan.stratify);
    for (const auto& m : inner)
      f.inner.push_back(make_split(train_curves, complement(f.train.size(), m), m, settings));
  });

  const std::size_t X = plan.xi_grid.size();
  std::vector<std::vector<CvCell>> cells(heads.size(), std::vector<CvCell>(X * L));

  parallel_for(X * L, [&](std::size_t cell) {
    const std::size_t xi_index = cell / L;
    const std::size_t l = cell % L;
    const double xi = plan.xi_grid[xi_index];
    const OuterFold& f = folds[l];

    const Eigen::MatrixXd restricted = geodesics.restrict_to(f.train).unfolded;
    const auto prox = embedding::penalized_proximity(restricted, f.train_labels, xi);
    const Eigen::MatrixXd z = embedding::classical_mds(prox, settings.d).coords;

    const std::vector<double> losses = regression_losses(f.inner, z, plan.h_grid, settings);
    const std::size_t best_h = static_cast<std::size_t>(std::min_element(losses.begin(), losses.end()) - losses.begin());
    const double h_inner = plan.h_grid[best_h];

    const double ridge = settings.ridge.value_or(interp::default_regression_ridge(f.train.size()));
    std::vector<Eigen::VectorXd> mu(f.held_out.query.size());
    std::vector<bool> ok(mu.size(), true);
    for (std::size_t q = 0; q < mu.size(); ++q) {
      try {
        mu[q] = interp::evaluate_local_linear(f.held_out.designs[q], z, settings.kernel, h_inner, ridge);
      } catch (const ExtrapolationError&) {
        ok[q] = false;
      }
    }
    for (std::size_t hd = 0; hd < heads.size(); ++hd) {
      const auto head = classify::ClassifierHead::fit(heads[hd], z, f.train_labels, data.class_count);
      std::size_t errors = 0;
      for (std::size_t q = 0; q < mu.size(); ++q)
        if (!ok[q] || head.predict(mu[q]) != labels[f.held_out.query[q]]) ++errors;
      cells[hd][cell] = CvCell{xi, l, errors, h_inner, losses};
    }
  });

  std::vector<CvResult> results(heads.size());
  for (std::size_t hd = 0; hd < heads.size(); ++hd) {
    CvResult& r = results[hd];
    r.xi_grid = plan.xi_grid;
    r.h_grid = plan.h_grid;
    r.cells = std::move(cells[hd]);
    r.evaluated = n;
    r.xi_losses.assign(X, 0);
    for (const CvCell& c : r.cells) r.xi_losses[static_cast<std::size_t>(&c - r.cells.data()) / L] += c.misclassifications;
    const std::size_t best = static_cast<std::size_t>(std::min_element(r.xi_losses.begin(), r.xi_losses.end()) -
                                                      r.xi_losses.begin());
    r.xi = plan.xi_grid[best];
    double h_sum = 0.0;
    for (std::size_t l = 0; l < L; ++l) h_sum += r.cells[best * L + l].h_inner;
    r.h_reg = h_sum / static_cast<double>(L);
  }
  return results;
}

CvResult nested_cv_select(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                          const CvPlan& plan, const classify::HeadSpec& head, const RegressionSettings& settings) {
  return nested_cv_select(data, geodesics, plan, std::span<const classify::HeadSpec>(&head, 1), settings).front();
}

BandwidthChoice select_bandwidth(const fda::LabeledDataset& data, const geometry::GeodesicDistances& geodesics,
                                 double xi, const CvPlan& plan, const RegressionSettings& settings) {
  data.validate();
  plan.validate();
  const std::size_t n = data.size();
  if (geodesics.size() != n) throw ParameterError("geodesic matrix does not match the dataset");
  const std::span<const int> labels(data.labels);
  const auto folds = make_folds(labels, plan.folds, derive_seed(plan.seed, {2}), plan.stratify);
  std::vector<SplitDesigns> splits(folds.size());
  parallel_for(folds.size(), [&](std::size_t m) {
    splits[m] = make_split(data.curves, complement(n, folds[m]), folds[m], settings);
  });
  const auto prox = embedding::penalized_proximity(geodesics.unfolded, labels, xi);
  const Eigen::MatrixXd z = embedding::classical_mds(prox, settings.d).coords;
  BandwidthChoice out;
  out.losses = regression_losses(splits, z, plan.h_grid, settings);
  out.h = plan.h_grid[static_cast<std::size_t>(std::min_element(out.losses.begin(), out.losses.end()) -
                                               out.losses.begin())];
  return out;
}

}  // namespace fsml::tuning
