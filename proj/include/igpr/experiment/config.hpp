#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/gp/kernel.hpp"
#include "igpr/inference/igpr.hpp"
#include "igpr/inference/schedule.hpp"
#include "igpr/models/registry.hpp"

namespace igpr::experiment {

inline constexpr int kSchemaVersion = 1;

enum class Algorithm { basic, proposal, adaptive, abc_rej, oracle };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::basic: return "basic";
    case Algorithm::proposal: return "proposal";
    case Algorithm::adaptive: return "adaptive";
    case Algorithm::abc_rej: return "abc-rej";
    case Algorithm::oracle: return "oracle";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "basic") return Algorithm::basic;
  if (s == "proposal") return Algorithm::proposal;
  if (s == "adaptive") return Algorithm::adaptive;
  if (s == "abc-rej") return Algorithm::abc_rej;
  if (s == "oracle") return Algorithm::oracle;
  throw ConfigError("algorithm: unknown value '" + s + "' (basic, proposal, adaptive, abc-rej, oracle)");
}

struct ObservedSource {
  enum class Kind { truth, file, value } kind = Kind::truth;
  std::uint64_t data_seed = 0;
  std::string path;
  std::vector<double> value;
};

struct RunConfig {
  std::string name;
  std::string model;
  nlohmann::json model_options = nlohmann::json::object();
  Algorithm algorithm = Algorithm::adaptive;
  std::size_t m = 100;
  std::size_t T = 10;
  double omega = 0.25;
  /// "linear" (0.1 (T - t) / T), "zeros", or explicit sigmas.
  nlohmann::json schedule = "linear";
  double epsilon = std::numeric_limits<double>::infinity();
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  ObservedSource observed;
  std::string output;

  std::string kernel = "se";
  bool ard = false;
  int restarts = 3;
  int iterations = 200;
  double lengthscale_span_below = 0.0;
  bool standardize_distance = false;

  std::vector<double> proposal_means;
  std::vector<double> proposal_stds;

  std::size_t abc_max_attempts = 100000;
  std::size_t abc_target_accepted = 1000;

  double oracle_epsilon_ref = 1e-3;
  std::size_t oracle_n_draws = 10000000;
  std::string oracle_cache_dir;

  inference::TemperingSchedule make_schedule() const;
  inference::IgprOptions igpr_options() const;
  nlohmann::json to_json() const;
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, const std::string& where,
                           const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items())
    if (!allowed.contains(key))
      throw ConfigError(where + (where.empty() ? "" : ".") + key + ": unknown field");
}

template <class T>
T field(const nlohmann::json& obj, const std::string& path, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(path + (path.empty() ? "" : ".") + key + ": wrong type");
  }
}

template <class T>
T required(const nlohmann::json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) throw ConfigError(path + (path.empty() ? "" : ".") + key + ": required field missing");
  return field<T>(obj, path, key, T{});
}

inline const nlohmann::json& section(const nlohmann::json& root, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!root.contains(key)) return empty;
  if (!root.at(key).is_object()) throw ConfigError(std::string(key) + ": must be an object");
  return root.at(key);
}

}  // namespace detail

/// Parses and validates a run configuration. Errors name the offending field.
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::field;
  using detail::required;
  if (!j.is_object()) throw ConfigError("configuration must be an object");
  detail::reject_unknown(j, "", {"schema_version", "name", "model", "model_options", "algorithm", "m", "T",
                                 "omega", "schedule", "epsilon", "trials", "seed", "observed", "output", "gp",
                                 "standardize_distance", "proposal", "abc", "oracle"});
  const int version = required<int>(j, "", "schema_version");
  if (version != kSchemaVersion)
    throw ConfigError("schema_version: " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kSchemaVersion) + ")");

  RunConfig c;
  c.name = field<std::string>(j, "", "name", "");
  c.model = required<std::string>(j, "", "model");
  c.model_options = j.contains("model_options") ? j.at("model_options") : nlohmann::json::object();
  if (!c.model_options.is_object()) throw ConfigError("model_options: must be an object");
  c.algorithm = algorithm_from_string(required<std::string>(j, "", "algorithm"));
  c.m = field<std::size_t>(j, "", "m", c.m);
  c.T = field<std::size_t>(j, "", "T", c.T);
  c.omega = field<double>(j, "", "omega", c.omega);
  if (j.contains("schedule")) c.schedule = j.at("schedule");
  if (j.contains("epsilon")) {
    const auto& e = j.at("epsilon");
    if (e.is_string() && e.get<std::string>() == "inf")
      c.epsilon = std::numeric_limits<double>::infinity();
    else
      c.epsilon = field<double>(j, "", "epsilon", c.epsilon);
  }
  c.trials = field<std::size_t>(j, "", "trials", c.trials);
  c.seed = field<std::uint64_t>(j, "", "seed", c.seed);
  c.output = field<std::string>(j, "", "output", "");
  c.standardize_distance = field<bool>(j, "", "standardize_distance", false);

  const auto& obs = detail::section(j, "observed");
  detail::reject_unknown(obs, "observed", {"source", "data_seed", "path", "value"});
  const std::string source = field<std::string>(obs, "observed", "source", "truth");
  if (source == "truth") {
    c.observed.kind = ObservedSource::Kind::truth;
    c.observed.data_seed = field<std::uint64_t>(obs, "observed", "data_seed", 0);
  } else if (source == "file") {
    c.observed.kind = ObservedSource::Kind::file;
    c.observed.path = required<std::string>(obs, "observed", "path");
  } else if (source == "value") {
    c.observed.kind = ObservedSource::Kind::value;
    c.observed.value = required<std::vector<double>>(obs, "observed", "value");
  } else {
    throw ConfigError("observed.source: unknown value '" + source + "' (truth, file, value)");
  }

  const auto& gpj = detail::section(j, "gp");
  detail::reject_unknown(gpj, "gp", {"kernel", "ard", "restarts", "iterations", "lengthscale_span_below"});
  c.kernel = field<std::string>(gpj, "gp", "kernel", c.kernel);
  c.ard = field<bool>(gpj, "gp", "ard", c.ard);
  c.restarts = field<int>(gpj, "gp", "restarts", c.restarts);
  c.iterations = field<int>(gpj, "gp", "iterations", c.iterations);
  c.lengthscale_span_below = field<double>(gpj, "gp", "lengthscale_span_below", c.lengthscale_span_below);

  const auto& prop = detail::section(j, "proposal");
  detail::reject_unknown(prop, "proposal", {"means", "stds"});
  c.proposal_means = field<std::vector<double>>(prop, "proposal", "means", {});
  c.proposal_stds = field<std::vector<double>>(prop, "proposal", "stds", {});

  const auto& abcj = detail::section(j, "abc");
  detail::reject_unknown(abcj, "abc", {"max_attempts", "target_accepted"});
  c.abc_max_attempts = field<std::size_t>(abcj, "abc", "max_attempts", c.abc_max_attempts);
  c.abc_target_accepted = field<std::size_t>(abcj, "abc", "target_accepted", c.abc_target_accepted);

  const auto& orj = detail::section(j, "oracle");
  detail::reject_unknown(orj, "oracle", {"epsilon_ref", "n_draws", "cache_dir"});
  c.oracle_epsilon_ref = field<double>(orj, "oracle", "epsilon_ref", c.oracle_epsilon_ref);
  c.oracle_n_draws = field<std::size_t>(orj, "oracle", "n_draws", c.oracle_n_draws);
  c.oracle_cache_dir = field<std::string>(orj, "oracle", "cache_dir", "");

  // Cross-field validation.
  if (c.trials < 1) throw ConfigError("trials: must be at least 1");
  if (c.m < 1) throw ConfigError("m: must be at least 1");
  try {
    (void)gp::kernel_family_from_string(c.kernel);
  } catch (const InvalidArgument&) {
    throw ConfigError("gp.kernel: unknown value '" + c.kernel + "' (se, exponential, rq)");
  }
  if (c.restarts < 1) throw ConfigError("gp.restarts: must be at least 1");
  if (c.iterations < 1) throw ConfigError("gp.iterations: must be at least 1");
  if (c.lengthscale_span_below < 0.0) throw ConfigError("gp.lengthscale_span_below: must be non-negative");
  switch (c.algorithm) {
    case Algorithm::adaptive:
      if (!j.contains("m")) throw ConfigError("m: required for algorithm adaptive");
      if (!j.contains("T")) throw ConfigError("T: required for algorithm adaptive");
      if (!j.contains("omega")) throw ConfigError("omega: required for algorithm adaptive");
      if (!(c.omega > 0.0 && c.omega <= 1.0)) throw ConfigError("omega: must lie in (0, 1]");
      if (c.T < 1) throw ConfigError("T: must be at least 1");
      try {
        (void)c.make_schedule();
      } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("schedule: ") + e.what());
      }
      break;
    case Algorithm::basic:
    case Algorithm::proposal:
      if (!j.contains("m")) throw ConfigError("m: required for algorithm " + to_string(c.algorithm));
      if (!j.contains("epsilon"))
        throw ConfigError("epsilon: required for algorithm " + to_string(c.algorithm));
      if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
      if (c.algorithm == Algorithm::proposal) {
        if (c.proposal_means.empty() || c.proposal_means.size() != c.proposal_stds.size())
          throw ConfigError("proposal: means and stds of equal, non-zero length are required");
        for (double s : c.proposal_stds)
          if (!(s > 0.0)) throw ConfigError("proposal.stds: must be positive");
      }
      break;
    case Algorithm::abc_rej:
      if (!j.contains("epsilon")) throw ConfigError("epsilon: required for algorithm abc-rej");
      if (!(c.epsilon > 0.0)) throw ConfigError("epsilon: must be positive");
      if (c.abc_target_accepted < 1) throw ConfigError("abc.target_accepted: must be at least 1");
      break;
    case Algorithm::oracle:
      if (!(c.oracle_epsilon_ref > 0.0)) throw ConfigError("oracle.epsilon_ref: must be positive");
      if (c.oracle_n_draws < 1) throw ConfigError("oracle.n_draws: must be at least 1");
      break;
  }
  return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("configuration " + path.string() + " is not valid JSON: " + e.what());
  }
  RunConfig c = parse_config(j);
  if (c.observed.kind == ObservedSource::Kind::file && std::filesystem::path(c.observed.path).is_relative())
    c.observed.path = (path.parent_path() / c.observed.path).string();
  return c;
}

inline inference::TemperingSchedule RunConfig::make_schedule() const {
  if (schedule.is_string()) {
    const auto s = schedule.get<std::string>();
    if (s == "linear") return inference::TemperingSchedule::linear(T);
    if (s == "zeros") return inference::TemperingSchedule::zeros(T);
    throw InvalidArgument("unknown schedule '" + s + "' (linear, zeros, or a list of sigmas)");
  }
  if (schedule.is_array()) {
    auto sigmas = schedule.get<std::vector<double>>();
    if (sigmas.size() != T)
      throw InvalidArgument("schedule lists " + std::to_string(sigmas.size()) + " sigmas but T = " +
                            std::to_string(T));
    return inference::TemperingSchedule(std::move(sigmas));
  }
  throw InvalidArgument("schedule must be a string or a list of sigmas");
}

inline inference::IgprOptions RunConfig::igpr_options() const {
  inference::IgprOptions o;
  o.fit.family = gp::kernel_family_from_string(kernel);
  o.fit.ard = ard;
  o.fit.restarts = restarts;
  o.fit.max_iterations = iterations;
  o.fit.lengthscale_span_below = lengthscale_span_below;
  o.standardize_distance = standardize_distance;
  return o;
}

/// Canonical form with every default filled in, as stored in manifests.
inline nlohmann::json RunConfig::to_json() const {
  nlohmann::json obs;
  switch (observed.kind) {
    case ObservedSource::Kind::truth: obs = {{"source", "truth"}, {"data_seed", observed.data_seed}}; break;
    case ObservedSource::Kind::file: obs = {{"source", "file"}, {"path", observed.path}}; break;
    case ObservedSource::Kind::value: obs = {{"source", "value"}, {"value", observed.value}}; break;
  }
  nlohmann::json j = {
      {"schema_version", kSchemaVersion},
      {"name", name},
      {"model", model},
      {"model_options", model_options},
      {"algorithm", to_string(algorithm)},
      {"m", m},
      {"T", T},
      {"omega", omega},
      {"schedule", schedule},
      {"trials", trials},
      {"seed", seed},
      {"observed", obs},
      {"output", output},
      {"gp",
       {{"kernel", kernel},
        {"ard", ard},
        {"restarts", restarts},
        {"iterations", iterations},
        {"lengthscale_span_below", lengthscale_span_below}}},
      {"standardize_distance", standardize_distance},
      {"proposal", {{"means", proposal_means}, {"stds", proposal_stds}}},
      {"abc", {{"max_attempts", abc_max_attempts}, {"target_accepted", abc_target_accepted}}},
      {"oracle",
       {{"epsilon_ref", oracle_epsilon_ref}, {"n_draws", oracle_n_draws}, {"cache_dir", oracle_cache_dir}}}};
  if (std::isinf(epsilon))
    j["epsilon"] = "inf";
  else
    j["epsilon"] = epsilon;
  return j;
}

}  // namespace igpr::experiment
