#include <doctest.h>

#include <cmath>
#include <vector>

#include "fsml/error.hpp"
#include "fsml/synth.hpp"

using namespace fsml;
using namespace fsml::synth;

namespace {

SynthData make(Model m, std::size_t n, std::size_t J, bool noise, std::uint64_t seed) {
  SynthSpec spec;
  spec.model = m;
  spec.n = n;
  spec.J = J;
  spec.noise = noise;
  spec.seed = seed;
  return generate(spec);
}

// Least-squares residual of each row of `values` outside span(basis rows).
double span_residual(const Eigen::MatrixXd& values, const Eigen::MatrixXd& basis) {
  const Eigen::MatrixXd coef = basis.transpose().colPivHouseholderQr().solve(values.transpose());
  return (values.transpose() - basis.transpose() * coef).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd basis_rows(const std::vector<double>& t, std::initializer_list<double (*)(double)> fns) {
  Eigen::MatrixXd b(static_cast<Eigen::Index>(fns.size()), static_cast<Eigen::Index>(t.size()));
  Eigen::Index r = 0;
  for (auto f : fns) {
    for (std::size_t j = 0; j < t.size(); ++j) b(r, static_cast<Eigen::Index>(j)) = f(t[j]);
    ++r;
  }
  return b;
}

double s2(double t) { return std::sin(2 * M_PI * t); }
double c2(double t) { return std::cos(2 * M_PI * t); }
double s4(double t) { return std::sin(4 * M_PI * t); }

// Composite Simpson on [0, x] with m (even) panels.
template <typename F>
double simpson(F f, double x, int m) {
  const double h = x / m;
  double s = f(0.0) + f(x);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_SUITE("synth") {

TEST_CASE("model names and dimensions") {
  for (const char* name : {"i", "ii", "iii", "iv", "v", "example2"}) CHECK(model_name(parse_model(name)) == name);
  CHECK_THROWS_AS(parse_model("vi"), ParameterError);
  CHECK(true_dimension(Model::swiss_rolls) == 2u);
  CHECK(true_dimension(Model::warping_family) == 1u);
  CHECK_FALSE(true_dimension(Model::gaussian_high).has_value());
}

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.n = 1;
  CHECK_THROWS_AS(generate(spec), ParameterError);
  spec.n = 10;
  spec.J = 1;
  CHECK_THROWS_AS(generate(spec), ParameterError);
}

TEST_CASE("equidistant sampling on [0, 1]") {
  const auto d = make(Model::torus, 5, 11, true, 1);
  for (const auto& c : d.curves) {
    REQUIRE(c.times.size() == 11);
    for (std::size_t j = 0; j < 11; ++j) CHECK(c.times[j] == doctest::Approx(j / 10.0).epsilon(1e-15));
    CHECK(c.times.front() == 0.0);
    CHECK(c.times.back() == 1.0);
  }
}

TEST_CASE("model (ii) curves lie in a three-dimensional span") {
  const auto d = make(Model::swiss_rolls, 100, 50, false, 7);
  const auto& t = d.curves[0].times;
  CHECK(span_residual(d.clean, basis_rows(t, {s2, c2, s4})) < 1e-10);
  for (std::size_t i = 0; i < 100; ++i)
    for (std::size_t j = 0; j < 50; ++j) CHECK(d.curves[i].values[j] == d.clean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  // Latent ranges.
  CHECK(d.latent.col(0).minCoeff() >= 0.0);
  CHECK(d.latent.col(0).maxCoeff() <= 2 * M_PI);
  CHECK(d.latent.col(1).maxCoeff() <= 8.0);
  REQUIRE(d.intrinsic.has_value());
}

TEST_CASE("model (ii) chart is isometric along each coordinate") {
  // L2 length of the curve path z1 -> X(z1, z2) equals the chart distance.
  const int y = 1;
  const double z2 = 3.0, a = 1.0, b = 4.0;
  double length = 0.0;
  const int steps = 20000;
  for (int s = 0; s < steps; ++s) {
    const double r0 = a + (b - a) * s / steps, r1 = a + (b - a) * (s + 1) / steps;
    double sq = 0.0;
    const int q = 400;
    for (int k = 0; k < q; ++k) {
      const double t = (k + 0.5) / q;
      const double diff = swiss_roll_curve(r1, z2, y, t) - swiss_roll_curve(r0, z2, y, t);
      sq += diff * diff / q;
    }
    length += std::sqrt(sq);
  }
  const double chart = std::abs(swiss_roll_chart(b, z2, y)[0] - swiss_roll_chart(a, z2, y)[0]);
  CHECK(length == doctest::Approx(chart).epsilon(1e-5));
  CHECK(swiss_roll_chart(2.0, 4.0, 0)[1] == doctest::Approx(4.0 / std::sqrt(2.0)));
}

TEST_CASE("model (iii) torus parameterisation identity") {
  const auto d = make(Model::torus, 200, 40, false, 3);
  const auto& t = d.curves[0].times;
  const Eigen::MatrixXd basis = basis_rows(t, {s2, c2, s4});
  const Eigen::MatrixXd coef = basis.transpose().colPivHouseholderQr().solve(d.clean.transpose());
  for (Eigen::Index i = 0; i < 200; ++i) {
    const double phi = std::atan2(coef(1, i), coef(0, i));
    const double r = std::hypot(coef(0, i), coef(1, i));
    const double theta = std::atan2(coef(2, i), r - 2.0);
    for (std::size_t j = 0; j < t.size(); ++j) {
      const double v = (2 + std::cos(theta)) * std::cos(phi) * s2(t[j]) + (2 + std::cos(theta)) * std::sin(phi) * c2(t[j]) +
                       std::sin(theta) * s4(t[j]);
      CHECK(std::abs(v - d.clean(i, static_cast<Eigen::Index>(j))) < 1e-10);
    }
    const double th = d.latent(i, 0), ph = d.latent(i, 1);
    CHECK(std::abs(std::remainder(th - theta, 2 * M_PI)) < 1e-9);
    CHECK(std::abs(std::remainder(ph - phi, 2 * M_PI)) < 1e-9);
    if (d.labels[static_cast<std::size_t>(i)] == 0)
      CHECK(th < ph);
    else
      CHECK(ph <= th);
  }
}

TEST_CASE("model (iv) at t = 0 equals xi1 log 2") {
  const auto d = make(Model::gaussian_low, 50, 20, false, 4);
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(d.clean(i, 0) == doctest::Approx(d.latent(i, 0) * std::log(2.0)).epsilon(1e-14));
    CHECK(d.clean(i, 19) == doctest::Approx(d.latent(i, 0) * std::log(3.0) + d.latent(i, 1) + d.latent(i, 2)).epsilon(1e-12));
  }
}

TEST_CASE("model (v) class-0 score variances follow exp(-j/3)") {
  const auto d = make(Model::gaussian_high, 5000, 10, false, 5);
  for (Eigen::Index j = 1; j <= 6; ++j) {
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < 5000; ++i) {
      if (d.labels[static_cast<std::size_t>(i)] != 0) continue;
      const double z = d.latent(i, j - 1);
      sum += z;
      sq += z * z;
      ++count;
    }
    const double mean = sum / count;
    const double var = (sq - count * mean * mean) / (count - 1);
    CHECK(std::abs(var / std::exp(-j / 3.0) - 1.0) < 0.05);
  }
}

TEST_CASE("model (v) basis and class mean shift") {
  CHECK(fourier_basis(1, 0.3) == 1.0);
  CHECK(fourier_basis(2, 0.1) == doctest::Approx(std::sqrt(2.0) * std::cos(2 * M_PI * 0.1)));
  CHECK(fourier_basis(3, 0.1) == doctest::Approx(std::sqrt(2.0) * std::sin(2 * M_PI * 0.1)));
  CHECK(fourier_basis(4, 0.1) == doctest::Approx(std::sqrt(2.0) * std::cos(4 * M_PI * 0.1)));
  const auto d = make(Model::gaussian_high, 20, 15, false, 6);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const double t = d.curves[0].times[4];
    double v = d.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : 0.0;
    for (std::size_t k = 0; k < 50; ++k) v += d.latent(i, static_cast<Eigen::Index>(k)) * fourier_basis(k + 1, t);
    CHECK(d.clean(i, 4) == doctest::Approx(v).epsilon(1e-12));
  }
}

TEST_CASE("model (i) warp and template") {
  CHECK(warping_map(0.0, 0.3) == 0.3);
  for (double z : {-1.0, -0.2, 0.5, 1.0}) {
    CHECK(warping_map(z, 0.0) == 0.0);
    CHECK(warping_map(z, 1.0) == doctest::Approx(1.0));
    CHECK(warping_map(z, 0.4) < warping_map(z, 0.6));
  }
  const auto phi = [](double t, double m, double s) { return std::exp(-0.5 * std::pow((t - m) / s, 2)) / (s * std::sqrt(2 * M_PI)); };
  CHECK(warping_template(0.37) == doctest::Approx(phi(0.37, 0.2, 0.08) + phi(0.37, 0.5, 0.1) + phi(0.37, 0.8, 0.13)));
  const auto d = make(Model::time_warping, 400, 10, false, 8);
  double mean_z1 = 0.0;
  for (Eigen::Index i = 0; i < 400; ++i) {
    const double z2 = d.latent(i, 1);
    if (d.labels[static_cast<std::size_t>(i)] == 0) {
      CHECK(z2 >= -1.0);
      CHECK(z2 <= 0.2);
    } else {
      CHECK(z2 >= -0.2);
      CHECK(z2 <= 1.0);
    }
    mean_z1 += d.latent(i, 0) / 400.0;
  }
  // Gamma shape 4, scale 0.5: mean 2, sd 1 (sd of the mean 0.05).
  CHECK(std::abs(mean_z1 - 2.0) < 0.2);
}

TEST_CASE("example 2 curves follow the warping family") {
  const auto d = make(Model::warping_family, 6, 21, false, 9);
  REQUIRE(d.intrinsic.has_value());
  for (Eigen::Index i = 0; i < 6; ++i) {
    const double omega = d.latent(i, 0);
    CHECK(d.labels[static_cast<std::size_t>(i)] == (omega <= M_PI ? 0 : 1));
    auto f = [&](double s) { return std::exp(warping_family_theta(omega, s, 50)); };
    const double total = simpson(f, 1.0, 2000);
    for (std::size_t j = 0; j < 21; j += 4) {
      const double t = d.curves[0].times[j];
      const double gamma = t == 0.0 ? 0.0 : simpson(f, t, 2000) / total;
      CHECK(std::abs(d.clean(i, static_cast<Eigen::Index>(j)) - std::sin(2 * M_PI * gamma)) < 1e-5);
    }
  }
}

TEST_CASE("generators are pure functions of the seed") {
  for (Model m : {Model::time_warping, Model::swiss_rolls, Model::torus, Model::gaussian_low, Model::gaussian_high,
                  Model::warping_family}) {
    const auto a = make(m, 30, 20, true, 42);
    const auto b = make(m, 30, 20, true, 42);
    const auto c = make(m, 30, 20, true, 43);
    CHECK(a.labels == b.labels);
    CHECK(a.clean == b.clean);
    bool same_values = true;
    for (std::size_t i = 0; i < 30; ++i) same_values = same_values && a.curves[i].values == b.curves[i].values;
    CHECK(same_values);
    CHECK(a.clean != c.clean);
  }
}

TEST_CASE("labels are roughly balanced") {
  const auto d = make(Model::swiss_rolls, 4000, 5, false, 10);
  double ones = 0.0;
  for (int y : d.labels) ones += y;
  CHECK(std::abs(ones / 4000.0 - 0.5) < 0.04);
}

TEST_CASE("noise variance is V_X / 20") {
  for (Model m : {Model::swiss_rolls, Model::time_warping, Model::gaussian_low}) {
    const auto d = make(m, 400, 50, true, 11);
    const std::size_t n = 400, J = 50;
    const auto& t = d.curves[0].times;
    // Oracle V_X: trapezoid over t of the pointwise sample variance.
    double vx = 0.0;
    for (std::size_t j = 0; j < J; ++j) {
      const Eigen::VectorXd col = d.clean.col(static_cast<Eigen::Index>(j));
      const double var = (col.array() - col.mean()).square().sum() / static_cast<double>(n - 1);
      const double w = j == 0 || j == J - 1 ? 0.5 : 1.0;
      vx += w * var * (t[1] - t[0]);
    }
    CHECK(d.integrated_variance == doctest::Approx(vx).epsilon(1e-12));
    CHECK(d.noise_variance == doctest::Approx(vx / 20.0).epsilon(1e-12));
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < J; ++j) {
        const double e = d.curves[i].values[j] - d.clean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        sq += e * e;
      }
    CHECK(std::abs(sq / static_cast<double>(n * J) / (vx / 20.0) - 1.0) < 0.10);
  }
  CHECK(make(Model::torus, 10, 10, false, 1).noise_variance == 0.0);
}

}  // TEST_SUITE
