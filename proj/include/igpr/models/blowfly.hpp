#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>

#include "igpr/models/model.hpp"
#include "igpr/random.hpp"

namespace igpr::models {

/// Delayed blowfly population map
///   N[t+1] = P N[t-tau] exp(-N[t-tau]/N0) e_t + N[t] exp(-delta eps_t)
/// with e_t ~ N(1/sigma_p^2, 1/sigma_p^2), eps_t ~ N(1/sigma_d^2, 1/sigma_d^2).
/// Parameters are (log P, log delta, log N0, log sigma_d, log sigma_p, log tau).
class Blowfly final : public SimulationModel {
 public:
  struct Options {
    std::size_t burn_in = 50;
    std::size_t steps = 1000;
    bool noise_off = false;
    double overflow = 1e12;
    std::size_t extinction_steps = 50;
  };

  Blowfly() = default;
  explicit Blowfly(Options opt) : opt_(opt) {
    if (opt_.steps < 4) throw InvalidArgument("blowfly needs at least 4 retained steps");
  }

  std::string name() const override { return "blowfly"; }
  std::size_t n_theta() const override { return 6; }
  std::size_t n_data() const override { return stats::kSummarySize; }
  std::vector<std::string> theta_names() const override {
    return {"log_P", "log_delta", "log_N0", "log_sigma_d", "log_sigma_p", "log_tau"};
  }
  std::vector<double> truth() const override { return {4.0, -1.4, 6.5, 0.25, 0.5, 2.8}; }
  PriorSpec prior() const override {
    return PriorSpec({NormalPrior{2.0, 4.0}, NormalPrior{-1.8, 0.16}, NormalPrior{6.0, 0.25},
                      NormalPrior{-0.75, 1.0}, NormalPrior{-0.5, 1.0}, NormalPrior{2.7, 0.01}});
  }

  /// Integer delay used by the map: round(exp(log_tau)), at least 1.
  static std::size_t delay(double log_tau) {
    const double tau = std::round(std::exp(log_tau));
    if (!std::isfinite(tau) || tau > 1e6) throw SimulationFailure("blowfly delay out of range");
    return static_cast<std::size_t>(std::max(1.0, tau));
  }

  /// Retained population series (burn-in discarded). The history before the
  /// first step is N0.
  stats::TimeSeries series(std::span<const double> theta, std::uint64_t seed) const {
    check_theta(theta);
    const double p = std::exp(theta[0]);
    const double decay = std::exp(theta[1]);
    const double n0 = std::exp(theta[2]);
    const double sigma_d = std::exp(theta[3]);
    const double sigma_p = std::exp(theta[4]);
    const std::size_t tau = delay(theta[5]);

    const double ep = 1.0 / (sigma_p * sigma_p);
    const double ed = 1.0 / (sigma_d * sigma_d);
    SplitMix64 rng(seed);
    std::normal_distribution<double> e_noise(ep, std::sqrt(ep));
    std::normal_distribution<double> d_noise(ed, std::sqrt(ed));

    // history[k] holds N at time (now - tau + k); history.back() is N[now].
    std::deque<double> history(tau + 1, n0);
    const std::size_t total = opt_.burn_in + opt_.steps;
    stats::TimeSeries out;
    out.dt = 1.0;
    out.values.reserve(opt_.steps);
    std::size_t zero_run = 0;
    for (std::size_t s = 0; s < total; ++s) {
      const double lagged = history.front();
      const double now = history.back();
      const double e = opt_.noise_off ? 1.0 : e_noise(rng);
      const double eps = opt_.noise_off ? 1.0 : d_noise(rng);
      double next = p * lagged * std::exp(-lagged / n0) * e + now * std::exp(-decay * eps);
      // A population cannot be negative; Gaussian noise can push the map below zero.
      next = std::max(next, 0.0);
      if (!std::isfinite(next) || next > opt_.overflow)
        throw SimulationFailure("blowfly population overflow at step " + std::to_string(s));
      zero_run = next == 0.0 ? zero_run + 1 : 0;
      if (zero_run >= opt_.extinction_steps)
        throw SimulationFailure("blowfly population extinct for " +
                                std::to_string(opt_.extinction_steps) + " steps at step " +
                                std::to_string(s));
      history.pop_front();
      history.push_back(next);
      if (s >= opt_.burn_in) out.values.push_back(next);
    }
    return out;
  }

  std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const override {
    return to_vector(stats::summary_stats(series(theta, seed)));
  }

  nlohmann::json config() const override {
    return {{"burn_in", opt_.burn_in}, {"steps", opt_.steps}, {"noise_off", opt_.noise_off},
            {"overflow", opt_.overflow}, {"extinction_steps", opt_.extinction_steps}};
  }

 private:
  Options opt_;
};

}  // namespace igpr::models
