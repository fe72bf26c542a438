#pragma once

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "igpr/abc/rejection.hpp"
#include "igpr/error.hpp"
#include "igpr/experiment/config.hpp"
#include "igpr/inference/igpr.hpp"
#include "igpr/models/registry.hpp"
#include "igpr/random.hpp"

namespace igpr::experiment {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputRootEnv = "IGPR_OUTPUT_ROOT";
/// Fraction of trials that must succeed for an aggregate to be marked valid.
inline constexpr double kMinSuccessFraction = 0.8;

struct TrialResult {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error_category;
  std::string error;
  std::vector<double> posterior_means;
  std::vector<double> posterior_stds;
  std::vector<double> errors;
  std::size_t simulations = 0;
  std::size_t failed_simulations = 0;
  bool nearest_fallback = false;
  std::size_t combine_fallbacks = 0;
  std::size_t clipped = 0;
  double wall_seconds = 0.0;
  double gp_seconds = 0.0;
  inference::RunRecord record;
};

inline nlohmann::json to_json(const TrialResult& r) {
  nlohmann::json j = {{"trial", r.trial}, {"seed", r.seed}, {"status", r.ok ? "ok" : "failed"}};
  if (!r.ok) {
    j["error_category"] = r.error_category;
    j["error"] = r.error;
    return j;
  }
  j["posterior_means"] = r.posterior_means;
  j["posterior_stds"] = r.posterior_stds;
  j["errors"] = r.errors;
  j["simulations"] = r.simulations;
  j["failed_simulations"] = r.failed_simulations;
  j["nearest_fallback"] = r.nearest_fallback;
  j["combine_fallbacks"] = r.combine_fallbacks;
  j["clipped"] = r.clipped;
  return j;
}

struct ParameterAggregate {
  std::string name;
  double truth = 0.0;
  std::size_t n = 0;
  double mean_error = 0.0;
  /// Sample standard deviation of the errors; NaN with fewer than two trials.
  double std_error = std::numeric_limits<double>::quiet_NaN();
  double median_error = 0.0;
  double mean_posterior_mean = 0.0;
  double mean_posterior_std = 0.0;
};

struct BundleSummary {
  std::filesystem::path directory;
  std::size_t trials = 0;
  std::size_t succeeded = 0;
  bool valid = false;
  std::size_t total_simulations = 0;
  std::vector<double> observed;
  std::vector<ParameterAggregate> parameters;
  std::vector<TrialResult> results;
};

inline double median(std::vector<double> v) {
  if (v.empty()) throw InvalidArgument("median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline std::vector<ParameterAggregate> aggregate(const std::vector<TrialResult>& results,
                                                 const std::vector<std::string>& names,
                                                 const std::vector<double>& truth) {
  std::vector<ParameterAggregate> out(names.size());
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto& a = out[j];
    a.name = names[j];
    a.truth = truth[j];
    std::vector<double> e;
    double pm = 0.0, ps = 0.0;
    for (const auto& r : results) {
      if (!r.ok) continue;
      e.push_back(r.errors[j]);
      pm += r.posterior_means[j];
      ps += r.posterior_stds[j];
    }
    a.n = e.size();
    if (e.empty()) {
      a.mean_error = a.median_error = a.mean_posterior_mean = a.mean_posterior_std =
          std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    const double n = static_cast<double>(e.size());
    double s = 0.0;
    for (double v : e) s += v;
    a.mean_error = s / n;
    if (e.size() >= 2) {
      double ss = 0.0;
      for (double v : e) ss += (v - a.mean_error) * (v - a.mean_error);
      a.std_error = std::sqrt(ss / (n - 1.0));
    }
    a.median_error = median(e);
    a.mean_posterior_mean = pm / n;
    a.mean_posterior_std = ps / n;
  }
  return out;
}

/// Round-trippable decimal text; NaN prints as "-".
inline std::string fmt(double v) {
  if (std::isnan(v)) return "-";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::filesystem::path resolve_output(const RunConfig& c) {
  std::filesystem::path out = c.output.empty()
                                  ? std::filesystem::path("runs") /
                                        (c.name.empty() ? c.model + "_" + to_string(c.algorithm) : c.name)
                                  : std::filesystem::path(c.output);
  if (out.is_relative()) {
    if (const char* root = std::getenv(kOutputRootEnv); root != nullptr && *root != '\0')
      out = std::filesystem::path(root) / out;
  }
  return out;
}

inline std::vector<double> resolve_observed(const RunConfig& c, const models::SimulationModel& model) {
  std::vector<double> obs;
  switch (c.observed.kind) {
    case ObservedSource::Kind::truth:
      obs = model.simulate(model.truth(), derive_seed(c.observed.data_seed, StreamPurpose::data, {0}));
      break;
    case ObservedSource::Kind::value:
      obs = c.observed.value;
      break;
    case ObservedSource::Kind::file: {
      std::ifstream in(c.observed.path);
      if (!in) throw ConfigError("observed.path: cannot open " + c.observed.path);
      try {
        const auto j = nlohmann::json::parse(in);
        obs = j.is_array() ? j.get<std::vector<double>>() : j.at("observed").get<std::vector<double>>();
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("observed.path: " + c.observed.path + " must hold a list or {\"observed\": [...]}: " +
                          e.what());
      }
      break;
    }
  }
  if (obs.size() != model.n_data())
    throw ConfigError("observed: " + std::to_string(obs.size()) + " values given but model " + model.name() +
                      " produces " + std::to_string(model.n_data()));
  return obs;
}

namespace detail {

inline void fill_errors(TrialResult& r, const std::vector<double>& truth) {
  r.errors.resize(truth.size());
  for (std::size_t j = 0; j < truth.size(); ++j) r.errors[j] = std::abs(r.posterior_means[j] - truth[j]);
}

inline void sample_moments(const std::vector<std::vector<double>>& xs, std::vector<double>& mean,
                           std::vector<double>& std) {
  const std::size_t d = xs.front().size();
  const double n = static_cast<double>(xs.size());
  mean.assign(d, 0.0);
  std.assign(d, 0.0);
  for (const auto& x : xs)
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
  for (double& v : mean) v /= n;
  if (xs.size() < 2) return;
  for (const auto& x : xs)
    for (std::size_t j = 0; j < d; ++j) std[j] += (x[j] - mean[j]) * (x[j] - mean[j]);
  for (double& v : std) v = std::sqrt(v / (n - 1.0));
}

inline void run_algorithm(const RunConfig& c, const models::SimulationModel& model, const PriorSpec& prior,
                          const std::vector<double>& observed, TrialResult& r) {
  const auto options = c.igpr_options();
  switch (c.algorithm) {
    case Algorithm::adaptive: {
      auto res = inference::adaptive_igpr(model, prior, observed, c.m, c.make_schedule(), c.omega, r.seed, options);
      for (std::size_t j = 0; j < prior.size(); ++j) {
        const auto mm = res.posterior.marginal_moments(j);
        r.posterior_means.push_back(mm.mean);
        r.posterior_stds.push_back(mm.std);
      }
      const auto& last = res.record.iterations.back();
      r.simulations = last.simulations;
      r.failed_simulations = last.failed_simulations;
      r.gp_seconds = last.gp_seconds;
      for (const auto& it : res.record.iterations) {
        r.nearest_fallback = r.nearest_fallback || it.nearest_fallback;
        for (bool f : it.combine_fallback) r.combine_fallbacks += f ? 1 : 0;
        for (bool f : it.clipped) r.clipped += f ? 1 : 0;
      }
      r.record = std::move(res.record);
      break;
    }
    case Algorithm::basic: {
      auto res = inference::basic_igpr(model, prior, observed, c.m, c.epsilon, r.seed, options);
      r.posterior_means = res.psi.means();
      r.posterior_stds = res.psi.stds();
      r.simulations = c.m;
      r.nearest_fallback = res.nearest_fallback;
      break;
    }
    case Algorithm::proposal: {
      if (c.proposal_means.size() != prior.size())
        throw ConfigError("proposal.means: model " + model.name() + " has " + std::to_string(prior.size()) +
                          " parameters");
      const inference::IndependentGaussian q(c.proposal_means, c.proposal_stds);
      auto res = inference::proposal_igpr(model, prior, q, observed, c.m, c.epsilon, r.seed, options);
      for (std::size_t j = 0; j < prior.size(); ++j) {
        const auto mm = res.posterior.marginal_moments(j);
        r.posterior_means.push_back(mm.mean);
        r.posterior_stds.push_back(mm.std);
      }
      r.simulations = c.m;
      r.nearest_fallback = res.nearest_fallback;
      for (bool f : res.combine_fallback) r.combine_fallbacks += f ? 1 : 0;
      for (bool f : res.clipped) r.clipped += f ? 1 : 0;
      break;
    }
    case Algorithm::abc_rej: {
      const auto res = abc::abc_rej(model, prior, observed, c.epsilon, c.abc_max_attempts,
                                    c.abc_target_accepted, r.seed);
      r.simulations = res.attempts;
      if (res.empty)
        throw NumericalFailure("rejection ABC accepted nothing in " + std::to_string(res.attempts) +
                               " attempts; widen epsilon");
      sample_moments(res.accepted, r.posterior_means, r.posterior_stds);
      break;
    }
    case Algorithm::oracle: {
      const auto est =
          c.oracle_cache_dir.empty()
              ? abc::oracle_posterior_mean(model, prior, observed, c.oracle_epsilon_ref, c.oracle_n_draws, r.seed)
              : abc::OracleCache(c.oracle_cache_dir)
                    .get_or_compute(model, prior, observed, c.oracle_epsilon_ref, c.oracle_n_draws, r.seed);
      r.posterior_means = est.mean;
      r.posterior_stds = est.standard_error;
      r.simulations = est.n_draws;
      break;
    }
  }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

inline std::string indexed(const char* stem, std::size_t k, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, k, ext);
  return buf;
}

}  // namespace detail

/// Runs one trial. Simulation and numerical failures are recorded in the
/// result; configuration and argument errors propagate.
inline TrialResult run_trial(const RunConfig& c, const models::SimulationModel& model,
                             const std::vector<double>& observed, std::size_t k) {
  TrialResult r;
  r.trial = k;
  r.seed = c.algorithm == Algorithm::oracle ? c.seed : derive_seed(c.seed, StreamPurpose::trial, {k});
  const auto start = std::chrono::steady_clock::now();
  try {
    detail::run_algorithm(c, model, model.prior(), observed, r);
    detail::fill_errors(r, model.truth());
    r.ok = true;
  } catch (const SimulationFailure& e) {
    r.error_category = "simulation";
    r.error = e.what();
  } catch (const NumericalFailure& e) {
    r.error_category = "numerical";
    r.error = e.what();
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

inline std::string aggregate_csv(const std::vector<ParameterAggregate>& params) {
  std::ostringstream os;
  os << "parameter,truth,n,mean_error,std_error,median_error,mean_posterior_mean,mean_posterior_std\n";
  for (const auto& a : params)
    os << a.name << ',' << fmt(a.truth) << ',' << a.n << ',' << fmt(a.mean_error) << ',' << fmt(a.std_error)
       << ',' << fmt(a.median_error) << ',' << fmt(a.mean_posterior_mean) << ',' << fmt(a.mean_posterior_std)
       << '\n';
  return os.str();
}

/// Executes every trial of a configuration and writes the result bundle:
///   manifest.json, observed.json, aggregate.csv,
///   trials/trial_NNN.json, traces/trial_NNN.jsonl (adaptive runs),
///   timing/trial_NNN.json (wall clock, the only non-reproducible files).
inline BundleSummary run_experiment(const RunConfig& c, const std::filesystem::path& directory) {
  const auto model = models::make_model(c.model, c.model_options);
  BundleSummary b;
  b.directory = directory;
  b.observed = resolve_observed(c, *model);
  b.trials = c.algorithm == Algorithm::oracle ? 1 : c.trials;

  namespace fs = std::filesystem;
  fs::create_directories(directory / "trials");
  fs::create_directories(directory / "timing");
  if (c.algorithm == Algorithm::adaptive) fs::create_directories(directory / "traces");

  for (std::size_t k = 0; k < b.trials; ++k) {
    TrialResult r = run_trial(c, *model, b.observed, k);
    detail::write_text(directory / "trials" / detail::indexed("trial", k, ".json"), to_json(r).dump(2) + "\n");
    nlohmann::json timing = {{"trial", k}, {"wall_seconds", r.wall_seconds}, {"gp_seconds", r.gp_seconds}};
    if (c.algorithm == Algorithm::adaptive) {
      std::ostringstream trace;
      inference::write_trace(trace, r.record, false);
      detail::write_text(directory / "traces" / detail::indexed("trial", k, ".jsonl"), trace.str());
      nlohmann::json its = nlohmann::json::array();
      for (const auto& it : r.record.iterations)
        its.push_back({{"t", it.t}, {"elapsed_seconds", it.elapsed_seconds}, {"gp_seconds", it.gp_seconds}});
      timing["iterations"] = its;
    }
    detail::write_text(directory / "timing" / detail::indexed("trial", k, ".json"), timing.dump(2) + "\n");
    if (r.ok) {
      ++b.succeeded;
      b.total_simulations += r.simulations;
    }
    b.results.push_back(std::move(r));
  }
  b.valid = static_cast<double>(b.succeeded) >= kMinSuccessFraction * static_cast<double>(b.trials);
  b.parameters = aggregate(b.results, model->theta_names(), model->truth());

  std::size_t failed_attempts = 0;
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& r : b.results) {
    failed_attempts += r.failed_simulations;
    seeds.push_back(r.seed);
  }
  const nlohmann::json manifest = {
      {"schema_version", kSchemaVersion},
      {"igpr_version", kVersion},
      {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
      {"config", c.to_json()},
      {"model",
       {{"name", model->name()},
        {"config", model->config()},
        {"theta_names", model->theta_names()},
        {"truth", model->truth()},
        {"n_data", model->n_data()}}},
      {"summary_layout",
       model->n_data() == stats::kSummarySize
           ? nlohmann::json("amplitude,velocity,acceleration,psd x mean,variance,skewness,kurtosis")
           : nlohmann::json(nullptr)},
      {"observed", b.observed},
      {"seeds", {{"root", c.seed}, {"data", c.observed.data_seed}, {"trials", seeds}}},
      {"summary",
       {{"trials", b.trials},
        {"succeeded", b.succeeded},
        {"failed", b.trials - b.succeeded},
        {"valid", b.valid},
        {"total_simulations", b.total_simulations},
        {"failed_simulation_attempts", failed_attempts}}}};
  detail::write_text(directory / "manifest.json", manifest.dump(2) + "\n");
  detail::write_text(directory / "observed.json", nlohmann::json{{"observed", b.observed}}.dump(2) + "\n");
  detail::write_text(directory / "aggregate.csv", aggregate_csv(b.parameters));
  return b;
}

}  // namespace igpr::experiment
