#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/experiment/config.hpp"
#include "igpr/experiment/runner.hpp"

namespace igpr::experiment {

/// A result bundle read back from disk.
struct LoadedBundle {
  std::filesystem::path directory;
  nlohmann::json manifest;
  std::vector<std::string> theta_names;
  std::vector<double> truth;
  std::vector<TrialResult> trials;
  /// Per trial, per iteration posterior means (adaptive runs only).
  std::vector<std::vector<std::vector<double>>> trace_means;
  std::vector<double> wall_seconds;
  std::vector<double> gp_seconds;
};

namespace detail {

inline nlohmann::json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError("bundle file missing: " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("bundle file " + p.string() + " is not valid JSON: " + e.what());
  }
}

}  // namespace detail

inline LoadedBundle load_bundle(const std::filesystem::path& dir) {
  LoadedBundle b;
  b.directory = dir;
  b.manifest = detail::read_json(dir / "manifest.json");
  const int version = b.manifest.value("schema_version", 0);
  if (version != kSchemaVersion)
    throw ConfigError("bundle " + dir.string() + " has schema_version " + std::to_string(version) +
                      " but this build reads version " + std::to_string(kSchemaVersion) +
                      "; migrate the bundle or re-run it with this version");
  try {
    b.theta_names = b.manifest.at("model").at("theta_names").get<std::vector<std::string>>();
    b.truth = b.manifest.at("model").at("truth").get<std::vector<double>>();
    const std::size_t n = b.manifest.at("summary").at("trials").get<std::size_t>();
    const bool adaptive = b.manifest.at("config").at("algorithm").get<std::string>() == "adaptive";
    for (std::size_t k = 0; k < n; ++k) {
      const auto tj = detail::read_json(dir / "trials" / detail::indexed("trial", k, ".json"));
      TrialResult r;
      r.trial = tj.at("trial").get<std::size_t>();
      r.seed = tj.at("seed").get<std::uint64_t>();
      r.ok = tj.at("status").get<std::string>() == "ok";
      if (r.ok) {
        r.posterior_means = tj.at("posterior_means").get<std::vector<double>>();
        r.posterior_stds = tj.at("posterior_stds").get<std::vector<double>>();
        r.errors = tj.at("errors").get<std::vector<double>>();
        r.simulations = tj.at("simulations").get<std::size_t>();
      } else {
        r.error_category = tj.value("error_category", "");
        r.error = tj.value("error", "");
      }
      b.trials.push_back(std::move(r));

      const auto timing = detail::read_json(dir / "timing" / detail::indexed("trial", k, ".json"));
      b.wall_seconds.push_back(timing.at("wall_seconds").get<double>());
      b.gp_seconds.push_back(timing.at("gp_seconds").get<double>());

      std::vector<std::vector<double>> means;
      if (adaptive && b.trials.back().ok) {
        std::ifstream in(dir / "traces" / detail::indexed("trial", k, ".jsonl"));
        if (!in) throw ConfigError("bundle " + dir.string() + " lacks the trace of trial " + std::to_string(k));
        std::string line;
        while (std::getline(in, line))
          if (!line.empty()) means.push_back(nlohmann::json::parse(line).at("posterior_means").get<std::vector<double>>());
      }
      b.trace_means.push_back(std::move(means));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bundle " + dir.string() + " does not match the manifest schema: " + e.what());
  }
  return b;
}

/// Error table with one row per (bundle, parameter). The "table" column uses
/// the "mean (std)" layout; std is "-" with a single successful trial.
inline std::string error_table_csv(const std::vector<LoadedBundle>& bundles) {
  std::ostringstream os;
  os << "bundle,parameter,truth,n,mean_error,std_error,median_error,table\n";
  for (const auto& b : bundles) {
    const auto agg = aggregate(b.trials, b.theta_names, b.truth);
    for (const auto& a : agg) {
      char cell[96];
      if (std::isnan(a.std_error))
        std::snprintf(cell, sizeof cell, "%.3f (-)", a.mean_error);
      else
        std::snprintf(cell, sizeof cell, "%.3f (%.3f)", a.mean_error, a.std_error);
      os << b.directory.filename().string() << ',' << a.name << ',' << fmt(a.truth) << ',' << a.n << ','
         << fmt(a.mean_error) << ',' << fmt(a.std_error) << ',' << fmt(a.median_error) << ",\"" << cell << "\"\n";
    }
  }
  return os.str();
}

/// Median and mean absolute error of the posterior mean after each iteration.
inline std::string error_vs_iteration_csv(const std::vector<LoadedBundle>& bundles) {
  std::ostringstream os;
  os << "bundle,t,parameter,n,median_error,mean_error\n";
  for (const auto& b : bundles) {
    std::size_t T = 0;
    for (const auto& tm : b.trace_means) T = std::max(T, tm.size());
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t j = 0; j < b.truth.size(); ++j) {
        std::vector<double> e;
        for (const auto& tm : b.trace_means)
          if (t < tm.size()) e.push_back(std::abs(tm[t][j] - b.truth[j]));
        if (e.empty()) continue;
        double s = 0.0;
        for (double v : e) s += v;
        os << b.directory.filename().string() << ',' << t + 1 << ',' << b.theta_names[j] << ',' << e.size() << ','
           << fmt(median(e)) << ',' << fmt(s / static_cast<double>(e.size())) << '\n';
      }
  }
  return os.str();
}

/// Mean wall-clock and GP time per successful trial against m, sorted by m.
inline std::string time_vs_m_csv(const std::vector<LoadedBundle>& bundles) {
  struct Row {
    std::size_t m;
    std::string name;
    std::size_t n;
    double wall;
    double gp;
  };
  std::vector<Row> rows;
  for (const auto& b : bundles) {
    double w = 0.0, g = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < b.trials.size(); ++k) {
      if (!b.trials[k].ok) continue;
      w += b.wall_seconds[k];
      g += b.gp_seconds[k];
      ++n;
    }
    const double d = n > 0 ? static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back({b.manifest.at("config").at("m").get<std::size_t>(), b.directory.filename().string(), n,
                    w / d, g / d});
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.m < b.m; });
  std::ostringstream os;
  os << "bundle,m,n,mean_wall_seconds,mean_gp_seconds\n";
  for (const auto& r : rows)
    os << r.name << ',' << r.m << ',' << r.n << ',' << fmt(r.wall) << ',' << fmt(r.gp) << '\n';
  return os.str();
}

/// Reads bundles and writes table.csv, error_vs_iteration.csv and
/// time_vs_m.csv into out_dir.
inline void write_report(const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out_dir) {
  if (dirs.empty()) throw ConfigError("report needs at least one bundle");
  std::vector<LoadedBundle> bundles;
  for (const auto& d : dirs) bundles.push_back(load_bundle(d));
  std::filesystem::create_directories(out_dir);
  detail::write_text(out_dir / "table.csv", error_table_csv(bundles));
  detail::write_text(out_dir / "error_vs_iteration.csv", error_vs_iteration_csv(bundles));
  detail::write_text(out_dir / "time_vs_m.csv", time_vs_m_csv(bundles));
}

}  // namespace igpr::experiment
