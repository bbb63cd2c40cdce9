#include "fsml/kernel.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "fsml/error.hpp"

namespace fsml::fda {

Kernel Kernel::parse(std::string_view name) {
  if (name == "gaussian") return Kernel(KernelKind::gaussian);
  if (name == "epanechnikov") return Kernel(KernelKind::epanechnikov);
  throw ParameterError("unknown kernel '" + std::string(name) + "'");
}

std::string Kernel::name() const { return kind_ == KernelKind::gaussian ? "gaussian" : "epanechnikov"; }

double Kernel::operator()(double u) const {
  switch (kind_) {
    case KernelKind::gaussian:
      return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    case KernelKind::epanechnikov:
      return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
  }
  return 0.0;
}

double Kernel::support_radius() const {
  return kind_ == KernelKind::gaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

double Kernel::roughness() const {
  return kind_ == KernelKind::gaussian ? 1.0 / (2.0 * std::sqrt(std::numbers::pi)) : 0.6;
}

double Kernel::second_moment() const { return kind_ == KernelKind::gaussian ? 1.0 : 0.2; }

}  // namespace fsml::fda
