#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/inference/gaussian.hpp"
#include "igpr/prior.hpp"

namespace igpr::inference {

struct MarginalMoments {
  double mean;
  double std;
};

/// pi_post(theta) ∝ phi(theta) pi(theta) / phi0(theta). All three factors are
/// independent products, so every marginal is a 1-D density of the same form.
class WeightedGaussianPosterior {
 public:
  static constexpr std::size_t kGridPoints = 4001;
  static constexpr double kGridHalfWidth = 10.0;

  WeightedGaussianPosterior(IndependentGaussian phi, IndependentGaussian phi0, PriorSpec prior)
      : phi_(std::move(phi)), phi0_(std::move(phi0)), prior_(std::move(prior)) {
    if (phi_.size() != phi0_.size() || phi_.size() != prior_.size())
      throw InvalidArgument("weighted Gaussian posterior: dimension mismatch");
  }

  const IndependentGaussian& phi() const noexcept { return phi_; }
  const IndependentGaussian& phi0() const noexcept { return phi0_; }
  const PriorSpec& prior() const noexcept { return prior_; }
  std::size_t size() const noexcept { return phi_.size(); }

  /// Unnormalised log density of marginal j; -inf outside the prior support.
  double marginal_log_density(std::size_t j, double x) const {
    const double lp = prior_.log_density(j, x);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    return phi_.log_density(j, x) + lp - phi0_.log_density(j, x);
  }

  /// Unnormalised log density of the joint; -inf outside the prior support.
  double log_density(std::span<const double> theta) const {
    if (theta.size() != size()) throw InvalidArgument("dimension mismatch in log_density");
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += marginal_log_density(j, theta[j]);
    return s;
  }

  /// Mean and std of marginal j by trapezoid quadrature on a uniform grid over
  /// mean(phi) +- 10 std(phi), intersected with the prior support.
  MarginalMoments marginal_moments(std::size_t j) const {
    if (j >= size()) throw InvalidArgument("marginal index out of range");
    auto [lo, hi] = prior_.support(j);
    const double a = std::max(lo, phi_.mean(j) - kGridHalfWidth * phi_.std(j));
    const double b = std::min(hi, phi_.mean(j) + kGridHalfWidth * phi_.std(j));
    if (!(b > a))
      throw NumericalFailure("posterior marginal " + std::to_string(j) +
                                 " has no mass inside the prior support",
                             0.0);

    const std::size_t n = kGridPoints;
    const double h = (b - a) / static_cast<double>(n - 1);
    std::vector<double> logw(n);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      logw[i] = marginal_log_density(j, a + h * static_cast<double>(i));
      peak = std::max(peak, logw[i]);
    }
    if (!std::isfinite(peak))
      throw NumericalFailure("posterior marginal " + std::to_string(j) + " has zero mass", 0.0);

    double mass = 0.0, first = 0.0, second = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a + h * static_cast<double>(i);
      const double w = std::exp(logw[i] - peak) * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
      mass += w;
      first += w * x;
    }
    const double mean = first / mass;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = a + h * static_cast<double>(i) - mean;
      const double w = std::exp(logw[i] - peak) * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
      second += w * x * x;
    }
    // mass is relative to the peak; the absolute mass is mass * exp(peak) * h.
    const double log_mass = std::log(mass * h) + peak;
    if (!(log_mass > std::log(1e-300)))
      throw NumericalFailure("posterior marginal " + std::to_string(j) + " mass below 1e-300",
                             log_mass);
    return {mean, std::sqrt(std::max(second / mass, 0.0))};
  }

 private:
  IndependentGaussian phi_;
  IndependentGaussian phi0_;
  PriorSpec prior_;
};

}  // namespace igpr::inference
