#pragma once

#include <string>
#include <string_view>

namespace fsml::fda {

enum class KernelKind { gaussian, epanechnikov };

/// A symmetric probability density on the real line.
class Kernel {
 public:
  constexpr explicit Kernel(KernelKind kind = KernelKind::gaussian) : kind_(kind) {}

  static Kernel parse(std::string_view name);

  KernelKind kind() const { return kind_; }
  std::string name() const;

  double operator()(double u) const;

  /// Half-width of the support; infinity for the Gaussian.
  double support_radius() const;
  /// R(K) = integral of K^2.
  double roughness() const;
  /// Second moment of K.
  double second_moment() const;

 private:
  KernelKind kind_;
};

}  // namespace fsml::fda
