#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/prior.hpp"
#include "igpr/stats/summary.hpp"

namespace igpr::models {

/// Stochastic forward map theta -> d. simulate() must be a pure function of
/// (theta, seed) and must throw SimulationFailure rather than return
/// non-finite data.
class SimulationModel {
 public:
  virtual ~SimulationModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t n_theta() const = 0;
  virtual std::size_t n_data() const = 0;
  virtual std::vector<std::string> theta_names() const = 0;
  virtual std::vector<double> truth() const = 0;
  virtual PriorSpec prior() const = 0;
  virtual std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const = 0;
  /// Configuration recorded in run manifests.
  virtual nlohmann::json config() const = 0;

 protected:
  void check_theta(std::span<const double> theta) const {
    if (theta.size() != n_theta())
      throw InvalidArgument(name() + " expects " + std::to_string(n_theta()) +
                            " parameters, got " + std::to_string(theta.size()));
    for (double v : theta)
      if (!std::isfinite(v)) throw InvalidArgument(name() + " received a non-finite parameter");
  }

  static std::vector<double> to_vector(const stats::SummaryVector& s) {
    return {s.begin(), s.end()};
  }
};

}  // namespace igpr::models
