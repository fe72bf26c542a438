#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/prior.hpp"

namespace igpr::inference {

/// Product of independent 1-D normals.
class IndependentGaussian {
 public:
  IndependentGaussian() = default;
  IndependentGaussian(std::vector<double> means, std::vector<double> stds)
      : means_(std::move(means)), stds_(std::move(stds)) {
    if (means_.size() != stds_.size())
      throw InvalidArgument("independent Gaussian needs one std per mean");
    for (std::size_t j = 0; j < stds_.size(); ++j)
      if (!(stds_[j] > 0.0) || !std::isfinite(stds_[j]) || !std::isfinite(means_[j]))
        throw InvalidArgument("independent Gaussian dimension " + std::to_string(j) +
                              " has invalid moments");
  }

  std::size_t size() const noexcept { return means_.size(); }
  double mean(std::size_t j) const { return means_.at(j); }
  double std(std::size_t j) const { return stds_.at(j); }
  double variance(std::size_t j) const { return stds_.at(j) * stds_.at(j); }
  const std::vector<double>& means() const noexcept { return means_; }
  const std::vector<double>& stds() const noexcept { return stds_; }

  double log_density(std::size_t j, double x) const {
    const double z = (x - means_.at(j)) / stds_.at(j);
    return -0.5 * z * z - std::log(stds_[j]) - 0.5 * std::log(2.0 * std::numbers::pi);
  }

  double log_density(std::span<const double> theta) const {
    if (theta.size() != size()) throw InvalidArgument("dimension mismatch in log_density");
    double s = 0.0;
    for (std::size_t j = 0; j < size(); ++j) s += log_density(j, theta[j]);
    return s;
  }

  template <class Engine>
  std::vector<double> sample(Engine& rng) const {
    std::vector<double> out(size());
    for (std::size_t j = 0; j < size(); ++j) {
      std::normal_distribution<double> n(means_[j], stds_[j]);
      out[j] = n(rng);
    }
    return out;
  }

 private:
  std::vector<double> means_;
  std::vector<double> stds_;
};

/// Moment-matched independent Gaussian of a prior: normal components pass
/// through, U[a,b] maps to ((a+b)/2, (b-a)/sqrt(12)).
inline IndependentGaussian prior_gaussian_moments(const PriorSpec& prior) {
  std::vector<double> means(prior.size()), stds(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) {
    means[j] = prior.mean(j);
    stds[j] = std::sqrt(prior.variance(j));
  }
  return {std::move(means), std::move(stds)};
}

struct Combined {
  IndependentGaussian phi;
  /// Per dimension: the combined precision was at or below the floor and the
  /// proposal's moments were kept instead.
  std::vector<bool> fallback;

  bool any_fallback() const {
    for (bool f : fallback)
      if (f) return true;
    return false;
  }
};

/// Per-dimension precision arithmetic phi ∝ psi * phi0 / q:
///   1/s_phi^2       = 1/s_psi^2 - 1/s_q^2 + 1/s_0^2
///   m_phi / s_phi^2 = m_psi/s_psi^2 - m_q/s_q^2 + m_0/s_0^2
/// A dimension whose combined precision is <= floor_fraction / s_0^2 keeps
/// the proposal's moments and is flagged. floor_fraction = 0 is the plain
/// positivity requirement; 1 additionally forbids phi from being wider than
/// phi0.
inline Combined combine_with_proposal(const IndependentGaussian& psi, const IndependentGaussian& q,
                                      const IndependentGaussian& phi0, double floor_fraction = 0.0) {
  const std::size_t n = psi.size();
  if (q.size() != n || phi0.size() != n)
    throw InvalidArgument("combine_with_proposal: dimension mismatch");
  std::vector<double> means(n), stds(n);
  std::vector<bool> fallback(n, false);
  for (std::size_t j = 0; j < n; ++j) {
    const double p_psi = 1.0 / psi.variance(j);
    const double p_q = 1.0 / q.variance(j);
    const double p_0 = 1.0 / phi0.variance(j);
    // Grouped so that q == phi0 cancels exactly.
    const double precision = p_psi + (p_0 - p_q);
    const double shift = psi.mean(j) * p_psi + (phi0.mean(j) * p_0 - q.mean(j) * p_q);
    if (!(precision > floor_fraction * p_0) || !std::isfinite(precision)) {
      fallback[j] = true;
      means[j] = q.mean(j);
      stds[j] = q.std(j);
      continue;
    }
    means[j] = shift / precision;
    stds[j] = std::sqrt(1.0 / precision);
  }
  return {IndependentGaussian(std::move(means), std::move(stds)), std::move(fallback)};
}

}  // namespace igpr::inference
