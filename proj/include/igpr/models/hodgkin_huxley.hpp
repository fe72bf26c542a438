#pragma once

#include <cmath>
#include <random>
#include <string>

#include "igpr/models/model.hpp"
#include "igpr/random.hpp"

namespace igpr::models {

/// Single-compartment Hodgkin-Huxley neuron with leak, sodium, delayed
/// rectifier potassium and slow M-type potassium currents, driven by a noisy
/// injected current.
class HodgkinHuxley final : public SimulationModel {
 public:
  struct Options {
    double dt = 0.025;        // ms
    double duration = 100.0;  // ms
    double v_initial = -70.0; // mV
    double drive_mean = -0.5; // mean of I_e / 10
    bool noise_off = false;
  };

  /// Physical parameters decoded from the 12 log-scale coordinates.
  struct Params {
    double g_leak, g_na, g_k, g_m;
    double e_leak, e_na, e_k, v_t;
    double k_beta_n1, k_beta_n2, tau_max, sigma;
  };

  struct State {
    double v, m, h, n, p;
  };

  HodgkinHuxley() = default;
  explicit HodgkinHuxley(Options opt) : opt_(opt) {
    if (!(opt_.dt > 0.0) || !(opt_.duration > 0.0))
      throw InvalidArgument("hh needs positive dt and duration");
  }

  std::string name() const override { return "hh"; }
  std::size_t n_theta() const override { return 12; }
  std::size_t n_data() const override { return stats::kSummarySize; }
  std::vector<std::string> theta_names() const override {
    return {"log_g_leak", "log_g_na",     "log_g_k",      "log_g_m",
            "log_neg_e_leak", "log_e_na", "log_neg_e_k",  "log_neg_v_t",
            "log_k_beta_n1",  "log_k_beta_n2", "log_tau_max", "log_sigma"};
  }
  std::vector<double> truth() const override {
    return {-4.60, 2.99, 1.60, -4.96, 4.24, 3.91, 4.60, 4.09, -0.69, 3.68, 6.90, 0.0};
  }
  PriorSpec prior() const override {
    return PriorSpec({UniformPrior{-5.30, -4.20}, UniformPrior{2.30, 3.40},
                      UniformPrior{0.92, 2.01},   UniformPrior{-5.65, -4.55},
                      UniformPrior{3.55, 4.65},   UniformPrior{3.21, 4.32},
                      UniformPrior{3.91, 5.01},   UniformPrior{3.40, 4.50},
                      UniformPrior{-1.39, -0.29}, UniformPrior{3.00, 4.09},
                      UniformPrior{6.21, 7.31},   UniformPrior{-0.69, 0.41}});
  }

  static Params decode(std::span<const double> t) {
    return {std::exp(t[0]),  std::exp(t[1]),  std::exp(t[2]),   std::exp(t[3]),
            -std::exp(t[4]), std::exp(t[5]),  -std::exp(t[6]),  -std::exp(t[7]),
            std::exp(t[8]),  std::exp(t[9]),  std::exp(t[10]),  std::exp(t[11])};
  }

  // x / (exp(x) - 1), continuous through x = 0.
  static double exprel_inv(double x) {
    if (std::abs(x) < 1e-6) return 1.0 - 0.5 * x;
    return x / std::expm1(x);
  }

  static double alpha_m(double v, double v_t) { return 1.28 * exprel_inv(-(v - v_t - 13.0) / 4.0); }
  static double beta_m(double v, double v_t) { return 1.4 * exprel_inv((v - v_t - 40.0) / 5.0); }
  static double alpha_h(double v, double v_t) { return 0.128 * std::exp(-(v - v_t - 17.0) / 18.0); }
  static double beta_h(double v, double v_t) {
    return 4.0 / (1.0 + std::exp(-(v - v_t - 40.0) / 5.0));
  }
  static double alpha_n(double v, double v_t) { return 0.16 * exprel_inv(-(v - v_t - 15.0) / 5.0); }
  static double beta_n(double v, double v_t, double k1, double k2) {
    return k1 * std::exp(-(v - v_t - 10.0) / k2);
  }
  static double p_inf(double v) { return 1.0 / (1.0 + std::exp(-(v + 35.0) / 10.0)); }
  static double tau_p(double v, double tau_max) {
    return tau_max / (3.3 * std::exp((v + 35.0) / 20.0) + std::exp(-(v + 35.0) / 20.0));
  }

  std::size_t steps() const noexcept {
    return static_cast<std::size_t>(std::llround(opt_.duration / opt_.dt));
  }

  /// Membrane voltage at every step, steps() + 1 samples. Gating variables use
  /// exponential Euler, the voltage explicit Euler. The injected current is
  /// redrawn every step.
  stats::TimeSeries voltage(std::span<const double> theta, std::uint64_t seed) const {
    check_theta(theta);
    const Params q = decode(theta);
    const std::size_t n = steps();
    const double dt = opt_.dt;

    SplitMix64 rng(seed);
    std::normal_distribution<double> drive(opt_.drive_mean, q.sigma);

    State s{opt_.v_initial, 0.0, 0.0, 0.0, 0.0};
    stats::TimeSeries out;
    out.dt = dt;
    out.values.resize(n + 1);
    out.values[0] = s.v;
    for (std::size_t k = 1; k <= n; ++k) {
      const double i_e = 10.0 * (opt_.noise_off ? opt_.drive_mean : drive(rng));
      const double i_leak = q.g_leak * (s.v - q.e_leak);
      const double i_na = q.g_na * s.m * s.m * s.m * s.h * (s.v - q.e_na);
      const double n2 = s.n * s.n;
      const double i_k = q.g_k * n2 * n2 * (s.v - q.e_k);
      const double i_m = q.g_m * s.p * (s.v - q.e_k);
      const double dv = -i_leak - i_na - i_k - i_m - i_e;

      const auto gate = [dt](double x, double a, double b) {
        const double rate = a + b;
        const double inf = a / rate;
        return inf + (x - inf) * std::exp(-dt * rate);
      };
      s.m = gate(s.m, alpha_m(s.v, q.v_t), beta_m(s.v, q.v_t));
      s.h = gate(s.h, alpha_h(s.v, q.v_t), beta_h(s.v, q.v_t));
      s.n = gate(s.n, alpha_n(s.v, q.v_t), beta_n(s.v, q.v_t, q.k_beta_n1, q.k_beta_n2));
      const double pinf = p_inf(s.v);
      s.p = pinf + (s.p - pinf) * std::exp(-dt / tau_p(s.v, q.tau_max));
      s.v += dt * dv;

      check_state(s, static_cast<double>(k) * dt);
      out.values[k] = s.v;
    }
    return out;
  }

  std::vector<double> simulate(std::span<const double> theta, std::uint64_t seed) const override {
    return to_vector(stats::summary_stats(voltage(theta, seed)));
  }

  nlohmann::json config() const override {
    return {{"dt", opt_.dt}, {"duration", opt_.duration}, {"v_initial", opt_.v_initial},
            {"drive_mean", opt_.drive_mean}, {"noise_off", opt_.noise_off}};
  }

 private:
  static void check_state(const State& s, double t) {
    const auto fail = [t](const char* var, double value) {
      throw SimulationFailure(std::string("hh variable ") + var + " invalid (" +
                              std::to_string(value) + ") at t=" + std::to_string(t) + " ms");
    };
    if (!std::isfinite(s.v)) fail("V", s.v);
    const std::pair<const char*, double> gates[] = {{"m", s.m}, {"h", s.h}, {"n", s.n}, {"p", s.p}};
    for (const auto& [var, x] : gates)
      if (!std::isfinite(x) || x < -0.01 || x > 1.01) fail(var, x);
  }

  Options opt_;
};

}  // namespace igpr::models
