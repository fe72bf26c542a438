#pragma once

#include <cmath>
#include <random>
#include <string>

#include "igpr/models/model.hpp"
#include "igpr/random.hpp"

namespace igpr::models {

/// Two-metabolite power-law pathway
///   X1' = (alpha X2^-0.4 - beta1 X1^0.5) exp(xi_t)
///   X2' = beta1 X1^0.5 - beta2 X1^-1 X2^0.4
/// observed through X1 + X2. Parameters are (log alpha, log beta1, log beta2).
class SSystem final : public SimulationModel {
 public:
  struct Options {
    double dt = 0.01;
    double horizon = 10.0;
    double noise_sd = 0.1;
    bool noise_off = false;
    double x1_initial = 1.2;
    double x2_initial = 1.0;
  };

  struct Trajectory {
    std::vector<double> x1;
    std::vector<double> x2;
  };

  SSystem() = default;
  explicit SSystem(Options opt) : opt_(opt) {
    if (!(opt_.dt > 0.0) || !(opt_.horizon > 0.0))
      throw InvalidArgument("s_system needs positive dt and horizon");
  }

  std::string name() const override { return "s_system"; }
  std::size_t n_theta() const override { return 3; }
  std::size_t n_data() const override { return stats::kSummarySize; }
  std::vector<std::string> theta_names() const override {
    return {"log_alpha", "log_beta1", "log_beta2"};
  }
  std::vector<double> truth() const override { return {0.0, 0.0, 0.0}; }
  // Second argument of the published N(-0.2, 0.2) read as a variance.
  PriorSpec prior() const override {
    return PriorSpec({NormalPrior{-0.2, 0.2}, NormalPrior{-0.2, 0.2}, NormalPrior{-0.2, 0.2}});
  }

  std::size_t steps() const noexcept {
    return static_cast<std::size_t>(std::llround(opt_.horizon / opt_.dt));
  }

  Trajectory integrate(std::span<const double> theta, std::uint64_t seed) const {
    check_theta(theta);
    const double alpha = std::exp(theta[0]);
    const double beta1 = std::exp(theta[1]);
    const double beta2 = std::exp(theta[2]);
    const std::size_t n = steps();

    Trajectory tr;
    tr.x1.resize(n + 1);
    tr.x2.resize(n + 1);
    double x1 = opt_.x1_initial, x2 = opt_.x2_initial;
    tr.x1[0] = x1;
    tr.x2[0] = x2;

    SplitMix64 rng(seed);
    std::normal_distribution<double> xi(0.0, opt_.noise_sd);
    const bool noisy = !opt_.noise_off && opt_.noise_sd > 0.0;
    for (std::size_t s = 1; s <= n; ++s) {
      const double flux = beta1 * std::sqrt(x1);
      const double f1 = (alpha * std::pow(x2, -0.4) - flux) * (noisy ? std::exp(xi(rng)) : 1.0);
      const double f2 = flux - beta2 * std::pow(x2, 0.4) / x1;
      x1 += opt_.dt * f1;
      x2 += opt_.dt * f2;
      if (!(x1 > 0.0) || !(x2 > 0.0) || !std::isfinite(x1) || !std::isfinite(x2))
        throw SimulationFailure("s_system state left the positive orthant at step " +
                                std::to_string(s) + " (X1=" + std::to_string(x1) +
                                ", X2=" + std::to_string(x2) + ")");
      tr.x1[s] = x1;
      tr.x2[s] = x2;
    }
    return tr;
  }

  stats::TimeSeries observe(std::span<const double> theta, std::uint64_t seed) const {
    const Trajectory tr = integrate(theta, seed);
    stats::TimeSeries ts;
    ts.dt = opt_.dt;
    ts.values.resize(tr.x1.size());
    for (std::size_t i = 0; i < tr.x1.size(); ++i) ts.values[i] = tr.x1[i] + tr.x2[i];
    return ts;
  }

  std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const override {
    return to_vector(stats::summary_stats(observe(theta, seed)));
  }

  nlohmann::json config() const override {
    return {{"dt", opt_.dt}, {"horizon", opt_.horizon}, {"noise_sd", opt_.noise_sd},
            {"noise_off", opt_.noise_off}, {"x1_initial", opt_.x1_initial},
            {"x2_initial", opt_.x2_initial}};
  }

 private:
  Options opt_;
};

}  // namespace igpr::models
