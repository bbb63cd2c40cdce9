#include "fsml/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "fsml/error.hpp"
#include "fsml/rng.hpp"

namespace fsml::synth {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::size_t kGaussianIIScores = 50;
constexpr std::size_t kWarpFineGrid = 2001;

double normal_pdf(double x, double mu, double sigma) {
  const double u = (x - mu) / sigma;
  return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * kPi));
}

std::vector<double> equidistant(std::size_t J) {
  std::vector<double> t(J);
  for (std::size_t j = 0; j < J; ++j) t[j] = static_cast<double>(j) / static_cast<double>(J - 1);
  t.back() = 1.0;
  return t;
}

/// Trapezoid integral over the sampling times of the pointwise sample
/// variance across curves.
double integrated_variance(const Eigen::MatrixXd& clean, const std::vector<double>& t) {
  const auto n = clean.rows();
  if (n < 2) return 0.0;
  const Eigen::RowVectorXd mean = clean.colwise().mean();
  const Eigen::RowVectorXd var = (clean.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(n - 1);
  double total = 0.0;
  for (std::size_t j = 1; j < t.size(); ++j)
    total += 0.5 * (t[j] - t[j - 1]) * (var[static_cast<Eigen::Index>(j)] + var[static_cast<Eigen::Index>(j - 1)]);
  return total;
}

/// Rows: fine-grid points; columns: sin(pi k t) / ((k - 8)^2 + 2), k = 1..k0.
/// theta_omega on the fine grid is this table times (sin(k omega))_k.
Eigen::MatrixXd warping_family_table(std::size_t k0) {
  Eigen::MatrixXd table(static_cast<Eigen::Index>(kWarpFineGrid), static_cast<Eigen::Index>(k0));
  const double step = 1.0 / static_cast<double>(kWarpFineGrid - 1);
  for (std::size_t g = 0; g < kWarpFineGrid; ++g)
    for (std::size_t k = 1; k <= k0; ++k) {
      const double kd = static_cast<double>(k);
      table(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(k - 1)) =
          std::sin(kPi * kd * static_cast<double>(g) * step) / ((kd - 8.0) * (kd - 8.0) + 2.0);
    }
  return table;
}

/// gamma(t) on the sampling times for example 2, by cumulative trapezoid of
/// exp(theta) on a fine grid and linear interpolation.
std::vector<double> warping_family_gamma(double omega, const Eigen::MatrixXd& table, const std::vector<double>& t) {
  Eigen::VectorXd coef(table.cols());
  for (Eigen::Index k = 0; k < coef.size(); ++k) coef[k] = std::sin(static_cast<double>(k + 1) * omega);
  const Eigen::VectorXd density = (table * coef).array().exp();
  std::vector<double> cum(kWarpFineGrid, 0.0);
  const double step = 1.0 / static_cast<double>(kWarpFineGrid - 1);
  for (std::size_t g = 1; g < kWarpFineGrid; ++g)
    cum[g] = cum[g - 1] + 0.5 * step * (density[static_cast<Eigen::Index>(g - 1)] + density[static_cast<Eigen::Index>(g)]);
  const double total = cum.back();
  std::vector<double> out(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double pos = t[j] / step;
    const auto lo = std::min(static_cast<std::size_t>(pos), kWarpFineGrid - 2);
    const double frac = pos - static_cast<double>(lo);
    out[j] = (cum[lo] + frac * (cum[lo + 1] - cum[lo])) / total;
  }
  return out;
}

}  // namespace

Model parse_model(const std::string& text) {
  if (text == "i") return Model::time_warping;
  if (text == "ii") return Model::swiss_rolls;
  if (text == "iii") return Model::torus;
  if (text == "iv") return Model::gaussian_low;
  if (text == "v") return Model::gaussian_high;
  if (text == "example2") return Model::warping_family;
  throw ParameterError("unknown model '" + text + "' (expected i, ii, iii, iv, v or example2)");
}

std::string model_name(Model model) {
  switch (model) {
    case Model::time_warping: return "i";
    case Model::swiss_rolls: return "ii";
    case Model::torus: return "iii";
    case Model::gaussian_low: return "iv";
    case Model::gaussian_high: return "v";
    case Model::warping_family: return "example2";
  }
  return "?";
}

std::optional<std::size_t> true_dimension(Model model) {
  switch (model) {
    case Model::time_warping:
    case Model::swiss_rolls:
    case Model::torus: return 2;
    case Model::gaussian_low: return 3;
    case Model::warping_family: return 1;
    case Model::gaussian_high: return std::nullopt;
  }
  return std::nullopt;
}

void SynthSpec::validate() const {
  if (n < 2) throw ParameterError("simulation needs n >= 2");
  if (J < 2) throw ParameterError("simulation needs J >= 2");
  if (k0 < 1) throw ParameterError("k0 must be positive");
}

double swiss_roll_curve(double z1, double z2, int y, double t) {
  const double angle = z1 + (y == 1 ? kPi : 0.0);
  return z1 * std::cos(angle) * std::sin(2 * kPi * t) + z1 * std::sin(angle) * std::cos(2 * kPi * t) +
         z2 * std::sin(4 * kPi * t);
}

double spiral_arc_length(double r) { return 0.5 * (r * std::sqrt(1.0 + r * r) + std::asinh(r)); }

Eigen::Vector2d swiss_roll_chart(double z1, double z2, int y) {
  // Each basis function has squared L2 norm 1/2 on [0, 1].
  const double s = spiral_arc_length(z1) / std::sqrt(2.0);
  return {y == 1 ? -s : s, z2 / std::sqrt(2.0)};
}

double warping_template(double t) {
  return normal_pdf(t, 0.2, 0.08) + normal_pdf(t, 0.5, 0.1) + normal_pdf(t, 0.8, 0.13);
}

double warping_map(double z, double t) {
  if (z == 0.0) return t;
  return std::expm1(z * t) / std::expm1(z);
}

double warping_family_theta(double omega, double t, std::size_t k0) {
  double s = 0.0;
  for (std::size_t k = 1; k <= k0; ++k) {
    const double kd = static_cast<double>(k);
    s += std::sin(kd * omega) * std::sin(kPi * kd * t) / ((kd - 8.0) * (kd - 8.0) + 2.0);
  }
  return s;
}

double fourier_basis(std::size_t j, double t) {
  if (j == 1) return 1.0;
  const double l = static_cast<double>(j / 2);
  return j % 2 == 0 ? std::sqrt(2.0) * std::cos(2 * l * kPi * t) : std::sqrt(2.0) * std::sin(2 * l * kPi * t);
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n;
  const std::size_t J = spec.J;
  const std::vector<double> t = equidistant(J);
  Rng rng(derive_seed(spec.seed, {0}));
  Rng noise_rng(derive_seed(spec.seed, {1}));
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SynthData out;
  out.labels.resize(n);
  out.clean.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(J));
  const auto N = static_cast<Eigen::Index>(n);

  switch (spec.model) {
    case Model::time_warping: {
      std::gamma_distribution<double> amplitude(4.0, 0.5);
      out.latent.resize(N, 2);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = coin(rng) ? 1 : 0;
        const double z1 = amplitude(rng);
        const double z2 = y == 0 ? -1.0 + 1.2 * unit(rng) : -0.2 + 1.2 * unit(rng);
        out.labels[i] = y;
        out.latent.row(static_cast<Eigen::Index>(i)) << z1, z2;
        for (std::size_t j = 0; j < J; ++j)
          out.clean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
              z1 * warping_template(warping_map(z2, t[j]));
      }
      break;
    }
    case Model::swiss_rolls: {
      out.latent.resize(N, 2);
      Eigen::MatrixXd chart(N, 2);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = coin(rng) ? 1 : 0;
        const double z1 = 2 * kPi * unit(rng);
        const double z2 = 8.0 * unit(rng);
        const auto r = static_cast<Eigen::Index>(i);
        out.labels[i] = y;
        out.latent.row(r) << z1, z2;
        chart.row(r) = swiss_roll_chart(z1, z2, y).transpose();
        for (std::size_t j = 0; j < J; ++j) out.clean(r, static_cast<Eigen::Index>(j)) = swiss_roll_curve(z1, z2, y, t[j]);
      }
      out.intrinsic = std::move(chart);
      break;
    }
    case Model::torus: {
      out.latent.resize(N, 2);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = coin(rng) ? 1 : 0;
        double theta = 0.0;
        double phi = 0.0;
        // Uniform on the triangle theta < phi (class 0) or phi <= theta (class 1).
        do {
          theta = 2 * kPi * unit(rng);
          phi = 2 * kPi * unit(rng);
        } while (y == 0 ? !(theta < phi) : !(phi <= theta));
        const auto r = static_cast<Eigen::Index>(i);
        out.labels[i] = y;
        out.latent.row(r) << theta, phi;
        for (std::size_t j = 0; j < J; ++j)
          out.clean(r, static_cast<Eigen::Index>(j)) = (2 + std::cos(theta)) * std::cos(phi) * std::sin(2 * kPi * t[j]) +
                                                       (2 + std::cos(theta)) * std::sin(phi) * std::cos(2 * kPi * t[j]) +
                                                       std::sin(theta) * std::sin(4 * kPi * t[j]);
      }
      out.intrinsic = out.latent;
      break;
    }
    case Model::gaussian_low: {
      const Eigen::Vector3d mu0(-1.0, 2.0, -3.0), mu1(-0.5, 2.5, -2.5);
      const Eigen::Vector3d sd0(0.6, 0.4, 0.2), sd1(0.9, 0.5, 0.3);
      out.latent.resize(N, 3);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = coin(rng) ? 1 : 0;
        Eigen::Vector3d xi;
        for (int k = 0; k < 3; ++k) xi[k] = (y == 0 ? mu0[k] : mu1[k]) + (y == 0 ? sd0[k] : sd1[k]) * gauss(rng);
        const auto r = static_cast<Eigen::Index>(i);
        out.labels[i] = y;
        out.latent.row(r) = xi.transpose();
        for (std::size_t j = 0; j < J; ++j)
          out.clean(r, static_cast<Eigen::Index>(j)) =
              xi[0] * std::log(t[j] + 2.0) + xi[1] * t[j] + xi[2] * t[j] * t[j] * t[j];
      }
      break;
    }
    case Model::gaussian_high: {
      out.latent.resize(N, static_cast<Eigen::Index>(kGaussianIIScores));
      Eigen::MatrixXd basis(static_cast<Eigen::Index>(kGaussianIIScores), static_cast<Eigen::Index>(J));
      for (std::size_t k = 0; k < kGaussianIIScores; ++k)
        for (std::size_t j = 0; j < J; ++j)
          basis(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = fourier_basis(k + 1, t[j]);
      for (std::size_t i = 0; i < n; ++i) {
        const int y = coin(rng) ? 1 : 0;
        const auto r = static_cast<Eigen::Index>(i);
        out.labels[i] = y;
        for (std::size_t k = 0; k < kGaussianIIScores; ++k) {
          const double jd = static_cast<double>(k + 1);
          const double sd = std::exp(-jd / (y == 0 ? 6.0 : 4.0));
          out.latent(r, static_cast<Eigen::Index>(k)) = sd * gauss(rng);
        }
        out.clean.row(r) = out.latent.row(r) * basis;
        if (y == 1) out.clean.row(r).array() += 1.0;
      }
      break;
    }
    case Model::warping_family: {
      const Eigen::MatrixXd table = warping_family_table(spec.k0);
      out.latent.resize(N, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double omega = 2 * kPi * unit(rng);
        const auto r = static_cast<Eigen::Index>(i);
        out.labels[i] = omega <= kPi ? 0 : 1;
        out.latent(r, 0) = omega;
        const std::vector<double> gamma = warping_family_gamma(omega, table, t);
        for (std::size_t j = 0; j < J; ++j) out.clean(r, static_cast<Eigen::Index>(j)) = std::sin(2 * kPi * gamma[j]);
      }
      out.intrinsic = out.latent;
      break;
    }
  }

  out.integrated_variance = integrated_variance(out.clean, t);
  out.noise_variance = spec.noise ? out.integrated_variance / 20.0 : 0.0;
  const double noise_sd = std::sqrt(out.noise_variance);
  out.curves.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    fda::SampledCurve& c = out.curves[i];
    c.id = "c" + std::to_string(i);
    c.times = t;
    c.values.resize(J);
    for (std::size_t j = 0; j < J; ++j) {
      double v = out.clean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (spec.noise) v += noise_sd * gauss(noise_rng);
      c.values[j] = v;
    }
  }
  return out;
}

}  // namespace fsml::synth
