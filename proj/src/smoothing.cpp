#include "fsml/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "fsml/error.hpp"

namespace fsml::fda {
namespace {

struct LocalLinearSums {
  double s0 = 0, s1 = 0, s2 = 0, t0 = 0, t1 = 0;
  bool any_weight = false;
};

LocalLinearSums accumulate(std::span<const double> times, std::span<const double> values, double t,
                           const Kernel& kernel, double h, std::size_t skip = static_cast<std::size_t>(-1)) {
  LocalLinearSums s;
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j == skip) continue;
    const double u = (times[j] - t) / h;
    const double k = kernel(u);
    if (k == 0.0) continue;
    s.any_weight = true;
    const double ku = k * u;
    s.s0 += k;
    s.s1 += ku;
    s.s2 += ku * u;
    s.t0 += k * values[j];
    s.t1 += ku * values[j];
  }
  const double inv = 1.0 / static_cast<double>(times.size() - (skip < times.size() ? 1 : 0));
  s.s0 *= inv;
  s.s1 *= inv;
  s.s2 *= inv;
  s.t0 *= inv;
  s.t1 *= inv;
  return s;
}

double ridged_estimate(const LocalLinearSums& s, double ridge) {
  double den = s.s0 * s.s2 - s.s1 * s.s1;
  if (std::abs(den) < ridge) den += den < 0.0 ? -ridge : ridge;
  return (s.t0 * s.s2 - s.t1 * s.s1) / den;
}

std::pair<double, double> bandwidth_clamp(const SampledCurve& raw) {
  double gap = 0.0;
  for (std::size_t j = 1; j < raw.times.size(); ++j) gap = std::max(gap, raw.times[j] - raw.times[j - 1]);
  const double span = raw.times.back() - raw.times.front();
  return {std::min(2.0 * gap, 0.5 * span), 0.5 * span};
}

struct BlockedQuartic {
  double rss = 0.0;
  double roughness = 0.0;  // sum over blocks of the integrated squared second derivative
};

/// Separate least-squares quartics on `blocks` consecutive runs of
/// observations of near-equal size.
BlockedQuartic blocked_quartic(const SampledCurve& raw, std::size_t blocks) {
  // 5-point Gauss-Legendre is exact for the squared quadratic p''.
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                      0.9061798459386640};
  static constexpr double wts[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
  const std::size_t J = raw.times.size();
  BlockedQuartic out;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t first = b * J / blocks;
    const std::size_t last = (b + 1) * J / blocks;  // exclusive
    const std::size_t m = last - first;
    const double lo = raw.times[first];
    const double hi = raw.times[last - 1];
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    Eigen::MatrixXd design(static_cast<Eigen::Index>(m), 5);
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (std::size_t j = 0; j < m; ++j) {
      const double s = (raw.times[first + j] - mid) / half;
      double p = 1.0;
      for (int k = 0; k < 5; ++k, p *= s) design(static_cast<Eigen::Index>(j), k) = p;
      y[static_cast<Eigen::Index>(j)] = raw.values[first + j];
    }
    const Eigen::VectorXd c = design.colPivHouseholderQr().solve(y);
    out.rss += (y - design * c).squaredNorm();
    for (int q = 0; q < 5; ++q) {
      const double s = nodes[q];
      const double second = (2.0 * c[2] + 6.0 * c[3] * s + 12.0 * c[4] * s * s) / (half * half);
      out.roughness += wts[q] * second * second * half;
    }
  }
  return out;
}

}  // namespace

Curve ridged_local_linear_smooth(const SampledCurve& raw, const GridPtr& grid, const Kernel& kernel,
                                 double bandwidth, std::optional<double> ridge) {
  raw.validate();
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw ParameterError("bandwidth must be positive, got " + std::to_string(bandwidth));
  const double J = static_cast<double>(raw.times.size());
  const double lambda = ridge.value_or(1.0 / (J * J));
  if (lambda < 0.0) throw ParameterError("ridge must be nonnegative");

  Eigen::VectorXd out(static_cast<Eigen::Index>(grid->size()));
  for (std::size_t g = 0; g < grid->size(); ++g) {
    const double t = grid->points()[g];
    const LocalLinearSums s = accumulate(raw.times, raw.values, t, kernel, bandwidth);
    if (!s.any_weight) {
      std::ostringstream msg;
      msg << "curve '" << raw.id << "': every kernel weight is zero at grid point t=" << t
          << " (bandwidth " << bandwidth << " too small)";
      throw DegenerateFitError(msg.str());
    }
    const double v = ridged_estimate(s, lambda);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "curve '" << raw.id << "': non-finite local-linear estimate at t=" << t;
      throw DegenerateFitError(msg.str());
    }
    out[static_cast<Eigen::Index>(g)] = v;
  }
  return Curve(grid, std::move(out));
}

double plugin_bandwidth(const SampledCurve& raw, const Kernel& kernel) {
  raw.validate();
  const std::size_t J = raw.times.size();
  if (J < 5) throw InsufficientDataError("plug-in bandwidth needs at least 5 observations, got " + std::to_string(J));

  const double span = raw.times.back() - raw.times.front();
  const std::size_t max_blocks = std::max<std::size_t>(std::min<std::size_t>(J / 20, 5), 1);
  std::vector<BlockedQuartic> fits;
  for (std::size_t N = 1; N <= max_blocks; ++N) fits.push_back(blocked_quartic(raw, N));
  // Mallows' Cp picks the block count, as in the Ruppert-Sheather-Wand rule.
  std::size_t best = 0;
  if (fits.size() > 1) {
    const double denom = fits.back().rss / static_cast<double>(J - 5 * max_blocks);
    double best_cp = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < fits.size(); ++k) {
      const double cp = fits[k].rss / denom - (static_cast<double>(J) - 10.0 * static_cast<double>(k + 1));
      if (cp < best_cp) {
        best_cp = cp;
        best = k;
      }
    }
  }
  const double sigma2 = fits[best].rss / static_cast<double>(std::max<std::size_t>(J - 5 * (best + 1), 1));
  const double roughness = fits[best].roughness;
  double mean_square = 0.0;
  for (double v : raw.values) mean_square += v * v;

  const auto [h_min, h_max] = bandwidth_clamp(raw);
  const double signal = mean_square / static_cast<double>(J) + sigma2;
  if (!(roughness * span * span * span > 1e-16 * signal)) return h_max;

  const double ck = std::pow(kernel.roughness() / (kernel.second_moment() * kernel.second_moment()), 0.2);
  const double h = ck * std::pow(sigma2 * span / (roughness * static_cast<double>(J)), 0.2);
  return std::clamp(h, h_min, h_max);
}

double loocv_bandwidth(const SampledCurve& raw, const Kernel& kernel, int candidates) {
  raw.validate();
  const std::size_t J = raw.times.size();
  if (J < 5) throw InsufficientDataError("LOO-CV bandwidth needs at least 5 observations, got " + std::to_string(J));
  if (candidates < 2) throw ParameterError("LOO-CV needs at least 2 candidate bandwidths");
  const auto [h_min, h_max] = bandwidth_clamp(raw);
  const double lambda = 1.0 / (static_cast<double>(J) * static_cast<double>(J));

  double best_h = h_max;
  double best_loss = std::numeric_limits<double>::infinity();
  for (int c = 0; c < candidates; ++c) {
    const double h = h_min * std::pow(h_max / h_min, static_cast<double>(c) / (candidates - 1));
    double loss = 0.0;
    for (std::size_t j = 0; j < J && std::isfinite(loss); ++j) {
      const LocalLinearSums s = accumulate(raw.times, raw.values, raw.times[j], kernel, h, j);
      if (!s.any_weight) {
        loss = std::numeric_limits<double>::infinity();
        break;
      }
      const double r = raw.values[j] - ridged_estimate(s, lambda);
      loss += r * r;
    }
    if (loss < best_loss) {
      best_loss = loss;
      best_h = h;
    }
  }
  return best_h;
}

Curve smooth_curve(const SampledCurve& raw, const GridPtr& grid, const Kernel& kernel, BandwidthRule rule) {
  const double h = rule == BandwidthRule::plugin ? plugin_bandwidth(raw, kernel) : loocv_bandwidth(raw, kernel);
  return ridged_local_linear_smooth(raw, grid, kernel, h);
}

}  // namespace fsml::fda
