#include <doctest.h>

#include <cmath>
#include <random>

#include "fsml/curve.hpp"
#include "fsml/error.hpp"
#include "fsml/kernel.hpp"
#include "fsml/smoothing.hpp"
#include "helpers.hpp"

using namespace fsml;
using namespace fsml::fda;
using testing::unit_grid;

TEST_SUITE("fda") {

TEST_CASE("kernels are symmetric densities") {
  for (auto kind : {KernelKind::gaussian, KernelKind::epanechnikov}) {
    const Kernel k(kind);
    double mass = 0.0;
    const double du = 1e-4;
    for (double u = -8.0; u < 8.0; u += du) mass += k(u + 0.5 * du) * du;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    for (double u : {0.1, 0.7, 1.3, 3.0}) {
      CHECK(k(u) == k(-u));
      CHECK(k(u) >= 0.0);
    }
  }
  CHECK(Kernel(KernelKind::epanechnikov)(1.5) == 0.0);
  CHECK_THROWS_AS(Kernel::parse("box"), ParameterError);
}

TEST_CASE("trapezoid inner product examples") {
  const auto g = unit_grid(101);
  const auto zero = Curve::constant(g, 0.0);
  const auto one = Curve::constant(g, 1.0);
  const auto wiggle = Curve::from_function(g, [](double t) { return std::exp(t) * std::cos(7 * t); });
  CHECK(trapezoid_inner_product(zero, wiggle) == 0.0);
  CHECK(trapezoid_inner_product(one, one) == doctest::Approx(1.0).epsilon(1e-14));

  const auto fine = unit_grid(1001);
  const auto s = Curve::from_function(fine, [](double t) { return std::sin(2 * M_PI * t); });
  CHECK(std::abs(trapezoid_inner_product(s, s) - 0.5) < 1e-6);
}

TEST_CASE("l2 distance examples") {
  const auto g = unit_grid(101);
  const auto one = Curve::constant(g, 1.0);
  const auto zero = Curve::constant(g, 0.0);
  CHECK(l2_distance(one, one) == 0.0);
  CHECK(l2_distance(one, zero) == doctest::Approx(1.0).epsilon(1e-14));
  const auto fine = unit_grid(1001);
  const auto s = Curve::from_function(fine, [](double t) { return std::sin(2 * M_PI * t); });
  CHECK(std::abs(l2_distance(s, Curve::constant(fine, 0.0)) - std::sqrt(0.5)) < 1e-5);
}

TEST_CASE("grid mismatch is an error") {
  const auto a = unit_grid(101);
  const auto b = Grid::uniform(0.0, 2.0, 101);
  CHECK_THROWS_AS(trapezoid_inner_product(Curve::constant(a, 1.0), Curve::constant(b, 1.0)), GridMismatchError);
  // Separately built but identical grids are accepted.
  CHECK_NOTHROW(trapezoid_inner_product(Curve::constant(a, 1.0), Curve::constant(unit_grid(101), 1.0)));
}

TEST_CASE("inner product symmetry and Cauchy-Schwarz on random curves") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  const auto g = unit_grid(64);
  for (int rep = 0; rep < 200; ++rep) {
    Eigen::VectorXd a(64), b(64);
    for (int i = 0; i < 64; ++i) {
      a[i] = n01(rng);
      b[i] = n01(rng) * 3.0;
    }
    const Curve f(g, a), h(g, b);
    CHECK(trapezoid_inner_product(f, h) == trapezoid_inner_product(h, f));
    CHECK(std::abs(trapezoid_inner_product(f, h)) <= l2_norm(f) * l2_norm(h) + 1e-12);
  }
}

TEST_CASE("local linear reproduces a line at interior points") {
  const auto g = unit_grid(101);
  SampledCurve raw{"line", {}, {}};
  for (int j = 0; j < 30; ++j) {
    const double t = j / 29.0;
    raw.times.push_back(t);
    raw.values.push_back(1.5 - 2.25 * t);
  }
  for (double h : {0.05, 0.1, 0.3}) {
    const Curve c = ridged_local_linear_smooth(raw, g, Kernel(), h, 0.0);
    for (std::size_t i = 10; i <= 90; ++i) {
      const double t = g->points()[i];
      CHECK(std::abs(c.values()[static_cast<Eigen::Index>(i)] - (1.5 - 2.25 * t)) < 1e-8);
    }
  }
}

// Reference local-linear fit by weighted least squares on (1, t_j - t).
double reference_local_linear(const SampledCurve& raw, double t, double h) {
  Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  for (std::size_t j = 0; j < raw.times.size(); ++j) {
    const double u = raw.times[j] - t;
    const double w = std::exp(-0.5 * (u / h) * (u / h));
    Eigen::Vector2d x(1.0, u);
    A += w * x * x.transpose();
    b += w * raw.values[j] * x;
  }
  return A.ldlt().solve(b)[0];
}

TEST_CASE("plug-in smoothing of a noisy sine") {
  const auto g = unit_grid(101);
  std::vector<double> rmse, bandwidths;
  double worst_reference_gap = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    SampledCurve raw{"s", {}, {}};
    for (int j = 0; j < 50; ++j) {
      const double t = j / 49.0;
      raw.times.push_back(t);
      raw.values.push_back(std::sin(2 * M_PI * t) + noise(rng));
    }
    const double h = plugin_bandwidth(raw, Kernel());
    bandwidths.push_back(h);
    const Curve c = ridged_local_linear_smooth(raw, g, Kernel(), h);
    double se = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
      const double t = g->points()[i];
      const double v = c.values()[static_cast<Eigen::Index>(i)];
      se += (v - std::sin(2 * M_PI * t)) * (v - std::sin(2 * M_PI * t));
      if (t >= 0.2 && t <= 0.8)
        worst_reference_gap = std::max(worst_reference_gap, std::abs(v - reference_local_linear(raw, t, h)));
    }
    rmse.push_back(std::sqrt(se / static_cast<double>(g->size())));
  }
  CHECK(testing::median(rmse) < 0.08);
  CHECK(*std::min_element(bandwidths.begin(), bandwidths.end()) >= 0.02);
  CHECK(*std::max_element(bandwidths.begin(), bandwidths.end()) <= 0.25);
  // Away from the ends the ridge J^-2 is far below the local determinant,
  // so the estimator matches plain weighted least squares there.
  CHECK(worst_reference_gap < 1e-8);
}

TEST_CASE("plug-in bandwidth on noiseless linear data hits the upper clamp") {
  SampledCurve raw{"l", {}, {}};
  for (int j = 0; j < 40; ++j) {
    raw.times.push_back(0.5 + j / 39.0 * 2.0);
    raw.values.push_back(3.0 * raw.times.back() - 1.0);
  }
  CHECK(plugin_bandwidth(raw, Kernel()) == doctest::Approx(1.0));
}

TEST_CASE("plug-in bandwidth needs five observations") {
  SampledCurve raw{"short", {0.0, 0.3, 0.6, 0.9}, {1.0, 2.0, 0.0, 1.0}};
  CHECK_THROWS_AS(plugin_bandwidth(raw, Kernel()), InsufficientDataError);
}

TEST_CASE("bandwidth and support errors") {
  const auto g = unit_grid(101);
  SampledCurve raw{"c", {0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}};
  CHECK_THROWS_AS(ridged_local_linear_smooth(raw, g, Kernel(), 0.0), ParameterError);
  CHECK_THROWS_AS(ridged_local_linear_smooth(raw, g, Kernel(), -1.0), ParameterError);
  // Compact kernel with a tiny bandwidth leaves grid points without support.
  try {
    ridged_local_linear_smooth(raw, g, Kernel(KernelKind::epanechnikov), 0.01);
    FAIL("expected a degenerate fit");
  } catch (const DegenerateFitError& e) {
    CHECK(std::string(e.what()).find("t=") != std::string::npos);
  }
}

TEST_CASE("ridge engages where only one observation carries weight") {
  const auto g = unit_grid(101);
  // Times on a 0.1 lattice and an Epanechnikov radius of 0.06: every grid
  // point sees one or two observations, and at grid points within 0.04 of a
  // lattice time exactly one, where S0*S2 - S1^2 is zero.
  SampledCurve raw{"sparse", {}, {}};
  for (int j = 0; j <= 10; ++j) {
    raw.times.push_back(j / 10.0);
    raw.values.push_back(std::cos(0.3 * j));
  }
  const Curve c = ridged_local_linear_smooth(raw, g, Kernel(KernelKind::epanechnikov), 0.06);
  CHECK(c.values().allFinite());
}

TEST_CASE("ridged smoother never returns non-finite values on degenerate designs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(2, 12);
  const auto g = unit_grid(33);
  int failures = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    // Clumped times: a few clusters with tiny spacing, compact kernel.
    SampledCurve raw{"f", {}, {}};
    const int J = count(rng);
    double t = unit(rng) * 0.2;
    for (int j = 0; j < J && t <= 1.0; ++j) {
      raw.times.push_back(t);
      raw.values.push_back(unit(rng) * 10.0 - 5.0);
      t += unit(rng) < 0.7 ? 1e-9 + unit(rng) * 1e-6 : unit(rng) * 0.3;
    }
    if (raw.times.size() < 2) continue;
    const double h = 0.02 + unit(rng);
    for (auto kind : {KernelKind::epanechnikov, KernelKind::gaussian}) {
      try {
        const Curve c = ridged_local_linear_smooth(raw, g, Kernel(kind), h);
        if (!c.values().allFinite()) ++failures;
      } catch (const DegenerateFitError&) {
        // No support at a grid point is reported, not returned as NaN.
      }
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("sampled curve validation") {
  SampledCurve bad{"x", {0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(bad.validate(), ParameterError);
  SampledCurve outside{"y", {0.0, 0.5, 1.5}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(outside.validate(0.0, 1.0), ParameterError);
}

}
