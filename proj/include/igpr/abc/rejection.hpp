#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/inference/igpr.hpp"
#include "igpr/models/model.hpp"
#include "igpr/prior.hpp"
#include "igpr/random.hpp"

namespace igpr::abc {

struct AbcResult {
  std::vector<std::vector<double>> accepted;
  std::size_t attempts = 0;
  double epsilon = 0.0;
  double acceptance_rate = 0.0;
  /// No draw was accepted before the budget ran out.
  bool empty = false;
};

/// Rejection ABC: attempt a draws theta from the prior and simulates with
/// streams indexed by a, and accepts when the distance is strictly below
/// epsilon. Replaying a seed at a smaller epsilon accepts a subset.
inline AbcResult abc_rej(const models::SimulationModel& model, const PriorSpec& prior,
                         std::span<const double> observed, double epsilon, std::size_t max_attempts,
                         std::size_t target_accepted, std::uint64_t seed) {
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (target_accepted < 1) throw InvalidArgument("target_accepted must be at least 1");
  if (observed.size() != model.n_data()) throw InvalidArgument("observation size differs from model output");
  AbcResult r;
  r.epsilon = epsilon;
  for (std::size_t a = 0; a < max_attempts && r.accepted.size() < target_accepted; ++a) {
    SplitMix64 rng(derive_seed(seed, StreamPurpose::abc, {a, 0}));
    std::vector<double> theta = prior.sample(rng);
    ++r.attempts;
    std::vector<double> d;
    try {
      d = model.simulate(theta, derive_seed(seed, StreamPurpose::abc, {a, 1}));
    } catch (const SimulationFailure&) {
      continue;
    }
    if (inference::distance(d, observed) < epsilon) r.accepted.push_back(std::move(theta));
  }
  r.acceptance_rate =
      r.attempts == 0 ? 0.0 : static_cast<double>(r.accepted.size()) / static_cast<double>(r.attempts);
  r.empty = r.accepted.empty();
  return r;
}

struct OracleEstimate {
  std::vector<double> mean;
  std::vector<double> standard_error;
  std::size_t accepted = 0;
  double epsilon_ref = 0.0;
  std::size_t n_draws = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kMinOracleAcceptances = 100;

/// Mean of the rejection-ABC accepted set over a fixed budget of n_draws,
/// with standard errors std / sqrt(accepted).
inline OracleEstimate oracle_posterior_mean(const models::SimulationModel& model, const PriorSpec& prior,
                                            std::span<const double> observed, double epsilon_ref,
                                            std::size_t n_draws, std::uint64_t seed) {
  const AbcResult r = abc_rej(model, prior, observed, epsilon_ref, n_draws,
                              std::numeric_limits<std::size_t>::max(), seed);
  if (r.accepted.size() < kMinOracleAcceptances)
    throw NumericalFailure("oracle accepted " + std::to_string(r.accepted.size()) + " of " +
                               std::to_string(n_draws) + " draws at epsilon " + std::to_string(epsilon_ref) +
                               "; increase n_draws or epsilon_ref",
                           static_cast<double>(r.accepted.size()));
  const std::size_t dim = prior.size();
  const double n = static_cast<double>(r.accepted.size());
  OracleEstimate est;
  est.mean.assign(dim, 0.0);
  est.standard_error.assign(dim, 0.0);
  for (const auto& th : r.accepted)
    for (std::size_t j = 0; j < dim; ++j) est.mean[j] += th[j];
  for (double& v : est.mean) v /= n;
  for (std::size_t j = 0; j < dim; ++j) {
    double ss = 0.0;
    for (const auto& th : r.accepted) ss += (th[j] - est.mean[j]) * (th[j] - est.mean[j]);
    est.standard_error[j] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  est.accepted = r.accepted.size();
  est.epsilon_ref = epsilon_ref;
  est.n_draws = n_draws;
  est.seed = seed;
  return est;
}

inline nlohmann::json to_json(const OracleEstimate& e) {
  return {{"mean", e.mean},
          {"standard_error", e.standard_error},
          {"accepted", e.accepted},
          {"epsilon_ref", e.epsilon_ref},
          {"n_draws", e.n_draws},
          {"seed", e.seed}};
}

inline OracleEstimate oracle_from_json(const nlohmann::json& j) {
  OracleEstimate e;
  e.mean = j.at("mean").get<std::vector<double>>();
  e.standard_error = j.at("standard_error").get<std::vector<double>>();
  e.accepted = j.at("accepted").get<std::size_t>();
  e.epsilon_ref = j.at("epsilon_ref").get<double>();
  e.n_draws = j.at("n_draws").get<std::size_t>();
  e.seed = j.at("seed").get<std::uint64_t>();
  return e;
}

/// 64-bit FNV-1a, used to name cache files after their configuration.
inline std::uint64_t fnv1a(const std::string& s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Oracle results stored as oracle_<hash>.json under a directory, keyed by
/// the model configuration, observation, epsilon_ref, n_draws and seed.
class OracleCache {
 public:
  explicit OracleCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  static nlohmann::json key(const models::SimulationModel& model, std::span<const double> observed,
                            double epsilon_ref, std::size_t n_draws, std::uint64_t seed) {
    return {{"model", model.name()},
            {"model_config", model.config()},
            {"observed", std::vector<double>(observed.begin(), observed.end())},
            {"epsilon_ref", epsilon_ref},
            {"n_draws", n_draws},
            {"seed", seed}};
  }

  std::filesystem::path path_for(const nlohmann::json& key) const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(key.dump())));
    return dir_ / ("oracle_" + std::string(buf) + ".json");
  }

  std::optional<OracleEstimate> load(const nlohmann::json& key) const {
    std::ifstream in(path_for(key));
    if (!in) return std::nullopt;
    try {
      const nlohmann::json j = nlohmann::json::parse(in);
      if (j.value("key", nlohmann::json()) != key) return std::nullopt;
      return oracle_from_json(j.at("result"));
    } catch (const nlohmann::json::exception&) {
      return std::nullopt;
    }
  }

  void store(const nlohmann::json& key, const OracleEstimate& e) const {
    std::filesystem::create_directories(dir_);
    const auto final_path = path_for(key);
    const auto tmp = final_path.string() + ".tmp";
    {
      std::ofstream out(tmp);
      if (!out) throw Error("cannot write oracle cache file " + tmp);
      out << nlohmann::json{{"key", key}, {"result", to_json(e)}}.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, final_path);
  }

  OracleEstimate get_or_compute(const models::SimulationModel& model, const PriorSpec& prior,
                                std::span<const double> observed, double epsilon_ref, std::size_t n_draws,
                                std::uint64_t seed) const {
    const nlohmann::json k = key(model, observed, epsilon_ref, n_draws, seed);
    if (auto hit = load(k)) return *hit;
    OracleEstimate e = oracle_posterior_mean(model, prior, observed, epsilon_ref, n_draws, seed);
    store(k, e);
    return e;
  }

 private:
  std::filesystem::path dir_;
};

}  // namespace igpr::abc
