#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsml/curve.hpp"

namespace fsml::synth {

enum class Model { time_warping, swiss_rolls, torus, gaussian_low, gaussian_high, warping_family };

/// "i", "ii", "iii", "iv", "v", "example2".
Model parse_model(const std::string& text);
std::string model_name(Model model);
/// Intrinsic dimension of the generating manifold; empty for model v.
std::optional<std::size_t> true_dimension(Model model);

struct SynthSpec {
  Model model = Model::swiss_rolls;
  std::size_t n = 200;
  std::size_t J = 50;
  bool noise = true;
  std::uint64_t seed = 0;
  std::size_t k0 = 50;  // terms of the warping family

  void validate() const;
};

struct SynthData {
  std::vector<fda::SampledCurve> curves;  // J equidistant times on [0, 1]
  std::vector<int> labels;
  Eigen::MatrixXd clean;   // n x J noiseless values
  Eigen::MatrixXd latent;  // generating variables per curve (model specific)
  /// Isometric chart coordinates where the model has one (ii: unrolled
  /// strip; iii: (theta, phi) angles; example2: omega).
  std::optional<Eigen::MatrixXd> intrinsic;
  double noise_variance = 0.0;
  double integrated_variance = 0.0;  // V_X, trapezoid over the J times
};

/// Columns of `latent`:
///   i: (Z1, Z2); ii: (Z1, Z2); iii: (theta, phi); iv: (xi1, xi2, xi3);
///   v: 50 scores; example2: omega.
SynthData generate(const SynthSpec& spec);

/// Values of model (ii) at t for latent (z1, z2) and label y.
double swiss_roll_curve(double z1, double z2, int y, double t);
/// Isometric coordinates of model (ii)'s surface under the L2 metric.
Eigen::Vector2d swiss_roll_chart(double z1, double z2, int y);
/// Arc length of the spiral r(cos r, sin r) from 0 to r.
double spiral_arc_length(double r);

/// Model (i)'s template mean: sum of three normal densities.
double warping_template(double t);
/// Model (i)'s warp (exp(z t) - 1) / (exp(z) - 1), identity at z = 0.
double warping_map(double z, double t);

/// Example 2: theta_omega(t) with k0 terms.
double warping_family_theta(double omega, double t, std::size_t k0);

/// Basis of model (v): phi_1 = 1, phi_{2l} = sqrt2 cos(2 l pi t),
/// phi_{2l+1} = sqrt2 sin(2 l pi t).
double fourier_basis(std::size_t j, double t);

}  // namespace fsml::synth
