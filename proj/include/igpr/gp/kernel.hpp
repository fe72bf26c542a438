#pragma once

#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "igpr/error.hpp"

namespace igpr::gp {

enum class KernelFamily { squared_exponential, exponential, rational_quadratic };

inline std::string_view to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::squared_exponential: return "se";
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::rational_quadratic: return "rq";
  }
  return "se";
}

inline KernelFamily kernel_family_from_string(std::string_view s) {
  if (s == "se" || s == "squared_exponential") return KernelFamily::squared_exponential;
  if (s == "exponential" || s == "exp") return KernelFamily::exponential;
  if (s == "rq" || s == "rational_quadratic") return KernelFamily::rational_quadratic;
  throw InvalidArgument("unknown kernel family '" + std::string(s) + "'");
}

/// Stationary kernel with k(d, d) = signal_variance for every d.
///
/// A single lengthscale is shared by all input dimensions; one lengthscale per
/// dimension gives the ARD variant.
struct KernelSpec {
  KernelFamily family = KernelFamily::squared_exponential;
  std::vector<double> lengthscales{1.0};
  double signal_variance = 1.0;
  double rq_alpha = 1.0;

  bool isotropic() const noexcept { return lengthscales.size() == 1; }

  void validate(std::size_t dim) const {
    if (lengthscales.empty() || (!isotropic() && lengthscales.size() != dim))
      throw InvalidArgument("kernel has " + std::to_string(lengthscales.size()) +
                            " lengthscales for " + std::to_string(dim) + "-dimensional inputs");
    for (double l : lengthscales)
      if (!(l > 0.0) || !std::isfinite(l)) throw InvalidArgument("lengthscales must be positive");
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
      throw InvalidArgument("signal variance must be positive");
    if (family == KernelFamily::rational_quadratic && !(rq_alpha > 0.0))
      throw InvalidArgument("rational-quadratic alpha must be positive");
  }

  /// Kernel value as a function of the lengthscale-scaled squared distance.
  double from_scaled_sq_dist(double r2) const noexcept {
    switch (family) {
      case KernelFamily::squared_exponential:
        return signal_variance * std::exp(-0.5 * r2);
      case KernelFamily::exponential:
        return signal_variance * std::exp(-std::sqrt(r2));
      case KernelFamily::rational_quadratic:
        return signal_variance * std::pow(1.0 + r2 / (2.0 * rq_alpha), -rq_alpha);
    }
    return 0.0;
  }

  double scaled_sq_dist(std::span<const double> a, std::span<const double> b) const noexcept {
    double r2 = 0.0;
    if (isotropic()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        r2 += d * d;
      }
      return r2 / (lengthscales[0] * lengthscales[0]);
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = (a[i] - b[i]) / lengthscales[i];
      r2 += d * d;
    }
    return r2;
  }
};

inline double kernel_eval(const KernelSpec& spec, std::span<const double> a,
                          std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidArgument("kernel inputs differ in dimension: " + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()));
  spec.validate(a.size());
  return spec.from_scaled_sq_dist(spec.scaled_sq_dist(a, b));
}

}  // namespace igpr::gp
