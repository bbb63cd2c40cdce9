#pragma once

#include <optional>

#include "fsml/curve.hpp"
#include "fsml/kernel.hpp"

namespace fsml::fda {

/// Ridged local-linear estimate of the curve underlying `raw`, evaluated on
/// `grid`. `ridge` defaults to J^-2 where J is the number of observations.
///
/// At each grid point t the estimate is (T0*S2 - T1*S1) / (den + r) with
/// den = S0*S2 - S1^2 and r = ridge * sign(den) whenever |den| < ridge. A zero
/// denominator takes the positive sign so the ridge always engages.
Curve ridged_local_linear_smooth(const SampledCurve& raw, const GridPtr& grid, const Kernel& kernel,
                                 double bandwidth, std::optional<double> ridge = std::nullopt);

/// Rule-of-thumb direct plug-in bandwidth for local-linear smoothing.
///
/// Least-squares quartics supply the residual variance and the roughness
/// R = integral of the squared second derivative. The observations are split
/// into N consecutive blocks with one quartic each, N in [1, max(min(J/20, 5), 1)]
/// chosen by Mallows' Cp (N = 1 is a single global quartic). Then
/// h = C_K * (sigma^2 * |T| / (R * J))^(1/5) with C_K = (R(K) / mu2(K)^2)^(1/5),
/// clamped to [2 * max sampling gap, |T| / 2]. Requires J >= 5.
double plugin_bandwidth(const SampledCurve& raw, const Kernel& kernel);

/// Leave-one-out cross-validated bandwidth over `candidates` log-spaced
/// values in the same clamp range as plugin_bandwidth.
double loocv_bandwidth(const SampledCurve& raw, const Kernel& kernel, int candidates = 25);

enum class BandwidthRule { plugin, loocv };

/// Smooths one curve with a per-curve bandwidth from `rule`.
Curve smooth_curve(const SampledCurve& raw, const GridPtr& grid, const Kernel& kernel,
                   BandwidthRule rule = BandwidthRule::plugin);

}  // namespace fsml::fda
