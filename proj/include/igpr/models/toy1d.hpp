#pragma once

#include <cmath>
#include <random>

#include "igpr/models/model.hpp"
#include "igpr/random.hpp"

namespace igpr::models {

/// d = erf(theta + eta), eta ~ N(0, noise_sd^2), prior U[-3, 3].
class Toy1d final : public SimulationModel {
 public:
  struct Options {
    double noise_sd = 0.1;
    bool noise_off = false;
  };

  Toy1d() = default;
  explicit Toy1d(Options opt) : opt_(opt) {}

  std::string name() const override { return "toy1d"; }
  std::size_t n_theta() const override { return 1; }
  std::size_t n_data() const override { return 1; }
  std::vector<std::string> theta_names() const override { return {"theta"}; }
  std::vector<double> truth() const override { return {1.0}; }
  PriorSpec prior() const override { return PriorSpec({UniformPrior{-3.0, 3.0}}); }

  double simulate_scalar(double theta, std::uint64_t seed) const {
    if (opt_.noise_off || opt_.noise_sd == 0.0) return std::erf(theta);
    SplitMix64 rng(seed);
    std::normal_distribution<double> eta(0.0, opt_.noise_sd);
    return std::erf(theta + eta(rng));
  }

  std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const override {
    check_theta(theta);
    return {simulate_scalar(theta[0], seed)};
  }

  nlohmann::json config() const override {
    return {{"noise_sd", opt_.noise_sd}, {"noise_off", opt_.noise_off}};
  }

 private:
  Options opt_;
};

/// Returns theta, optionally with independent N(0, noise_sd^2) per coordinate.
class IdentityModel final : public SimulationModel {
 public:
  struct Options {
    std::size_t dim = 1;
    double noise_sd = 0.0;
    double prior_lower = -3.0;
    double prior_upper = 3.0;
  };

  IdentityModel() = default;
  explicit IdentityModel(Options opt) : opt_(opt) {
    if (opt_.dim == 0) throw InvalidArgument("identity model needs at least one dimension");
  }

  std::string name() const override { return "identity"; }
  std::size_t n_theta() const override { return opt_.dim; }
  std::size_t n_data() const override { return opt_.dim; }
  std::vector<std::string> theta_names() const override {
    std::vector<std::string> out;
    for (std::size_t j = 0; j < opt_.dim; ++j) out.push_back("theta" + std::to_string(j + 1));
    return out;
  }
  std::vector<double> truth() const override { return std::vector<double>(opt_.dim, 1.0); }
  PriorSpec prior() const override {
    return PriorSpec(std::vector<PriorComponent>(opt_.dim, UniformPrior{opt_.prior_lower, opt_.prior_upper}));
  }

  std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const override {
    check_theta(theta);
    std::vector<double> out(theta.begin(), theta.end());
    if (opt_.noise_sd > 0.0) {
      SplitMix64 rng(seed);
      std::normal_distribution<double> noise(0.0, opt_.noise_sd);
      for (double& v : out) v += noise(rng);
    }
    return out;
  }

  nlohmann::json config() const override {
    return {{"dim", opt_.dim}, {"noise_sd", opt_.noise_sd},
            {"prior_lower", opt_.prior_lower}, {"prior_upper", opt_.prior_upper}};
  }

 private:
  Options opt_;
};

}  // namespace igpr::models
