#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "igpr/abc/rejection.hpp"
#include "igpr/error.hpp"
#include "igpr/experiment/config.hpp"
#include "igpr/experiment/report.hpp"
#include "igpr/experiment/runner.hpp"
#include "igpr/models/registry.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kOther = 1,
  kConfig = 2,
  kModel = 3,
  kNumerical = 4,
  kInvalidAggregate = 5,
};

namespace fs = std::filesystem;
using namespace igpr;

int cmd_run(const std::string& config_path, const std::string& output) {
  const auto cfg = experiment::load_config(config_path);
  const fs::path dir = output.empty() ? experiment::resolve_output(cfg) : fs::path(output);
  const auto b = experiment::run_experiment(cfg, dir);
  std::printf("%s: %zu/%zu trials succeeded, %zu simulations\n", dir.string().c_str(), b.succeeded, b.trials,
              b.total_simulations);
  std::printf("%-12s %10s %22s %12s\n", "parameter", "truth", "mean error (std)", "median");
  for (const auto& a : b.parameters) {
    char cell[64];
    if (std::isnan(a.std_error))
      std::snprintf(cell, sizeof cell, "%.4f (-)", a.mean_error);
    else
      std::snprintf(cell, sizeof cell, "%.4f (%.4f)", a.mean_error, a.std_error);
    std::printf("%-12s %10.4f %22s %12.4f\n", a.name.c_str(), a.truth, cell, a.median_error);
  }
  for (const auto& r : b.results)
    if (!r.ok) std::fprintf(stderr, "trial %zu failed (%s): %s\n", r.trial, r.error_category.c_str(), r.error.c_str());
  if (!b.valid) {
    std::fprintf(stderr, "aggregate invalid: fewer than %.0f%% of trials succeeded\n",
                 100.0 * experiment::kMinSuccessFraction);
    return kInvalidAggregate;
  }
  return kOk;
}

int cmd_report(const std::vector<std::string>& bundles, const std::string& out) {
  std::vector<fs::path> dirs(bundles.begin(), bundles.end());
  const fs::path out_dir = out.empty() ? dirs.front() / "report" : fs::path(out);
  experiment::write_report(dirs, out_dir);
  std::printf("wrote %s, %s, %s\n", (out_dir / "table.csv").string().c_str(),
              (out_dir / "error_vs_iteration.csv").string().c_str(), (out_dir / "time_vs_m.csv").string().c_str());
  return kOk;
}

int cmd_oracle(const std::string& config_path, const std::string& cache) {
  const auto cfg = experiment::load_config(config_path);
  const auto model = models::make_model(cfg.model, cfg.model_options);
  const auto observed = experiment::resolve_observed(cfg, *model);
  fs::path dir = cache.empty() ? fs::path(cfg.oracle_cache_dir) : fs::path(cache);
  if (dir.empty()) dir = experiment::resolve_output(cfg).parent_path() / "oracle_cache";
  const abc::OracleCache oc(dir);
  const auto est = oc.get_or_compute(*model, model->prior(), observed, cfg.oracle_epsilon_ref, cfg.oracle_n_draws,
                                     cfg.seed);
  std::printf("%s: %zu of %zu draws accepted at epsilon %g\n", model->name().c_str(), est.accepted, est.n_draws,
              est.epsilon_ref);
  const auto names = model->theta_names();
  for (std::size_t j = 0; j < est.mean.size(); ++j)
    std::printf("%-12s %.6f +- %.6f\n", names[j].c_str(), est.mean[j], est.standard_error[j]);
  std::printf("cached in %s\n", dir.string().c_str());
  return kOk;
}

int cmd_list_models() {
  for (const auto& name : models::model_names()) {
    const auto m = models::make_model(name);
    std::printf("%-10s n_theta=%-3zu n_data=%zu\n", name.c_str(), m->n_theta(), m->n_data());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inverse Gaussian process regression experiments"};
  app.require_subcommand(1);

  std::string config, output, cache, report_out;
  std::vector<std::string> bundles;

  auto* run = app.add_subcommand("run", "Run all trials of a configuration and write a result bundle");
  run->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "Bundle directory (overrides the configuration)");

  auto* report = app.add_subcommand("report", "Write error tables and plot series from result bundles");
  report->add_option("bundles", bundles, "Bundle directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("-o,--output", report_out, "Report directory (default: <first bundle>/report)");

  auto* oracle = app.add_subcommand("oracle", "Compute or load the rejection posterior-mean reference");
  oracle->add_option("config", config, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
  oracle->add_option("--cache", cache, "Cache directory");

  auto* list = app.add_subcommand("list-models", "List registered models");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config, output);
    if (report->parsed()) return cmd_report(bundles, report_out);
    if (oracle->parsed()) return cmd_oracle(config, cache);
    if (list->parsed()) return cmd_list_models();
  } catch (const igpr::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const igpr::SimulationFailure& e) {
    std::fprintf(stderr, "simulation failure: %s\n", e.what());
    return kModel;
  } catch (const igpr::NumericalFailure& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const igpr::InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kOther;
  }
  return kOther;
}
