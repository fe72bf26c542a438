// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//
//   igpr_acceptance --cache DIR --work DIR [--only N ...]

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "igpr/abc/rejection.hpp"
#include "igpr/experiment/config.hpp"
#include "igpr/experiment/runner.hpp"
#include "igpr/gp/regression.hpp"
#include "igpr/inference/gaussian.hpp"
#include "igpr/inference/igpr.hpp"
#include "igpr/models/registry.hpp"
#include "igpr/random.hpp"
#include "igpr/stats/summary.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace igpr;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path cache;
  fs::path work;
};

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double median(std::vector<double> v) { return experiment::median(std::move(v)); }

gp::GPHyperparams hyper(gp::KernelSpec k, double nu, double mu) {
  gp::GPHyperparams hp;
  hp.kernel = std::move(k);
  hp.noise_variance = nu;
  hp.mean_const = mu;
  return hp;
}

experiment::BundleSummary run_config(const Context& ctx, const std::string& name) {
  const auto cfg = experiment::load_config(fs::path(IGPR_CONFIG_DIR) / (name + ".json"));
  return experiment::run_experiment(cfg, ctx.work / name);
}

Outcome gp_algebra(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(u(rng) * 20.0), d = 1 + static_cast<Eigen::Index>(u(rng) * 5.0);
    Eigen::MatrixXd x(m, d);
    Eigen::VectorXd y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index c = 0; c < d; ++c) x(i, c) = 2.0 * u(rng);
      y(i) = 4.0 * u(rng) - 2.0;
    }
    std::vector<double> q(static_cast<std::size_t>(d));
    for (double& v : q) v = 2.0 * u(rng);
    gp::KernelSpec k;
    k.family = static_cast<gp::KernelFamily>(rep % 3);
    k.signal_variance = 0.2 + 2.0 * u(rng);
    k.lengthscales = {0.2 + 1.5 * u(rng)};
    const double nu = 0.01 + 0.5 * u(rng), mu = 2.0 * u(rng) - 1.0;
    const auto p = gp::gp_predict(gp::TrainingSet(x, y), hyper(k, nu, mu), q);
    const auto o = oracle::joint_gaussian(x, y, q, k, nu, mu);
    worst = std::max({worst, std::abs(p.mean - o.mean), std::abs(p.variance - o.variance)});
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-8 && secs < 5.0, format("max deviation %.2e over 200 sets (tol 1e-8), %.2f s", worst, secs)};
}

Outcome duplicated_inputs(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t m : {1u, 2u, 5u, 50u}) {
    const double c = 1.3, nu = 0.2, mu = 0.7;
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(m), 3, -0.4);
    Eigen::VectorXd y(static_cast<Eigen::Index>(m));
    for (auto& v : y) v = n(rng);
    gp::KernelSpec k;
    k.signal_variance = c;
    k.lengthscales = {0.8};
    const std::vector<double> q{-0.4, -0.4, -0.4};
    const double a = c * static_cast<double>(m) / nu;
    const double expected = a / (1.0 + a) * y.mean() + mu / (1.0 + a);
    worst = std::max(worst, std::abs(gp::gp_predict(gp::TrainingSet(x, y), hyper(k, nu, mu), q).mean - expected));
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 1.0, format("max deviation %.2e for m in {1,2,5,50} (tol 1e-10), %.3f s", worst, secs)};
}

Outcome proposal_identities(const Context&) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  double worst = 0.0;
  std::size_t flag_errors = 0, fallbacks = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const inference::IndependentGaussian psi({u(rng) - 1.5, u(rng)}, {u(rng), u(rng)});
    const inference::IndependentGaussian phi0({u(rng), u(rng) - 1.5}, {u(rng), u(rng)});
    const auto c = inference::combine_with_proposal(psi, phi0, phi0);
    for (std::size_t j = 0; j < 2; ++j) {
      worst = std::max(worst, std::abs(c.phi.mean(j) - psi.mean(j)));
      worst = std::max(worst, std::abs(c.phi.std(j) - psi.std(j)));
    }
    const inference::IndependentGaussian q({u(rng)}, {u(rng)}), p1({u(rng)}, {u(rng)}), p0({u(rng)}, {u(rng)});
    for (double floor : {0.0, 1.0}) {
      const double prec = 1.0 / p1.variance(0) - 1.0 / q.variance(0) + 1.0 / p0.variance(0);
      const auto r = inference::combine_with_proposal(p1, q, p0, floor);
      const bool expect = prec <= floor / p0.variance(0);
      if (r.fallback[0] != expect) ++flag_errors;
      if (r.fallback[0] && (r.phi.mean(0) != q.mean(0) || r.phi.std(0) != q.std(0))) ++flag_errors;
      fallbacks += r.fallback[0];
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && flag_errors == 0 && fallbacks > 0 && secs < 1.0,
          format("neutrality max deviation %.2e (tol 1e-12); %zu fallback mismatches, %zu fallbacks exercised; %.3f s",
                 worst, flag_errors, fallbacks, secs)};
}

Outcome toy_reproduction(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto b = run_config(ctx, "toy_adaptive");
  std::vector<double> means, stds;
  for (const auto& r : b.results)
    if (r.ok) {
      means.push_back(r.posterior_means[0]);
      stds.push_back(r.posterior_stds[0]);
    }
  const double secs = seconds_since(t0);
  if (means.size() != 20) return {false, format("%zu of 20 trials succeeded", means.size())};
  const double mm = median(means), ms = median(stds);
  const bool ok = mm >= 0.87 && mm <= 1.37 && ms >= 0.04 && ms <= 0.40 && secs < 30.0;
  return {ok, format("median mean %.3f in [0.87, 1.37], median std %.3f in [0.04, 0.40], %zu simulations per "
                     "trial, %.1f s",
                     mm, ms, b.results.front().simulations, secs)};
}

Outcome convergence_ladder(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const models::Toy1d toy;
  const PriorSpec prior = toy.prior();
  const std::vector<double> observed{0.869};
  const abc::OracleCache cache(ctx.cache);
  const auto ref = cache.get_or_compute(toy, prior, observed, 1e-3, 10'000'000, 2024);
  const double oracle_secs = seconds_since(t0);

  // Hyperparameters come from the first 200 accepted points (an i.i.d.
  // subsample); the prediction at the observation uses the whole set.
  const std::size_t fit_cap = 200;
  const std::vector<std::pair<double, std::size_t>> ladder{{0.3, 100}, {0.1, 400}, {0.03, 1600}};
  std::vector<double> medians;
  for (std::size_t rung = 0; rung < ladder.size(); ++rung) {
    const auto [eps, m] = ladder[rung];
    std::vector<double> errors;
    for (std::uint64_t k = 0; k < 20; ++k) {
      const std::uint64_t seed = derive_seed(7, StreamPurpose::trial, {rung, k});
      Eigen::MatrixXd x(static_cast<Eigen::Index>(m), 1);
      Eigen::VectorXd y(static_cast<Eigen::Index>(m));
      std::size_t accepted = 0;
      for (std::uint64_t a = 0; accepted < m; ++a) {
        if (a > 100'000'000) throw NumericalFailure("ladder rung could not fill its training set");
        SplitMix64 draw(derive_seed(seed, StreamPurpose::draw, {a}));
        const double theta = prior.sample(draw)[0];
        const double d = toy.simulate_scalar(theta, derive_seed(seed, StreamPurpose::simulate, {a}));
        if (std::abs(d - observed[0]) < eps) {
          x(static_cast<Eigen::Index>(accepted), 0) = d;
          y(static_cast<Eigen::Index>(accepted)) = theta;
          ++accepted;
        }
      }
      const std::size_t nf = std::min(m, fit_cap);
      const gp::TrainingSet subset(x.topRows(static_cast<Eigen::Index>(nf)), y.head(static_cast<Eigen::Index>(nf)));
      gp::FitConfig cfg;
      cfg.seed = derive_seed(seed, StreamPurpose::fit, {0});
      cfg.prior_variance = prior.variance(0);
      const auto hp = gp::gp_fit(subset, cfg);
      const auto pred = gp::gp_predict(gp::TrainingSet(x, y), hp, observed);
      errors.push_back(std::abs(pred.mean - ref.mean[0]));
    }
    medians.push_back(median(errors));
  }
  const double secs = seconds_since(t0);
  const bool monotone = medians[1] <= medians[0] && medians[2] <= medians[1];
  const bool ok = monotone && medians[2] < 0.05 && secs < 300.0;
  return {ok, format("oracle mean %.4f (se %.4f, %zu accepted, %.1f s); median errors %.4f -> %.4f -> %.4f "
                     "(non-increasing, final < 0.05); %.1f s",
                     ref.mean[0], ref.standard_error[0], ref.accepted, oracle_secs, medians[0], medians[1],
                     medians[2], secs)};
}

std::vector<double> iteration_errors(const experiment::BundleSummary& b, std::size_t iteration, std::size_t j,
                                     double truth) {
  std::vector<double> e;
  for (const auto& r : b.results)
    if (r.ok) e.push_back(std::abs(r.record.iterations.at(iteration).posterior_means[j] - truth));
  return e;
}

experiment::BundleSummary s_system_bundle;
double s_system_seconds = 0.0;

Outcome s_system_reproduction(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  s_system_bundle = run_config(ctx, "s_system_adaptive");
  s_system_seconds = seconds_since(t0);
  const auto& b = s_system_bundle;
  if (b.succeeded != b.trials) return {false, format("%zu of %zu trials succeeded", b.succeeded, b.trials)};
  bool ok = s_system_seconds < 600.0;
  std::string detail = "median abs error";
  for (const auto& p : b.parameters) {
    ok = ok && p.median_error <= 0.06;
    detail += format(" %s %.4f", p.name.c_str(), p.median_error);
  }
  return {ok, detail + format(" (tol 0.06); %.1f s", s_system_seconds)};
}

Outcome s_system_error_decay(const Context& ctx) {
  if (s_system_bundle.results.empty()) s_system_reproduction(ctx);
  const auto& b = s_system_bundle;
  const auto model = models::make_model("s_system");
  const auto truth = model->truth();
  const auto names = model->theta_names();
  const std::size_t last = b.results.front().record.iterations.size() - 1;
  bool ok = last == 9;
  std::string detail = "median error t=1 -> t=10:";
  for (std::size_t j = 0; j < truth.size(); ++j) {
    const double first = median(iteration_errors(b, 0, j, truth[j]));
    const double final_ = median(iteration_errors(b, last, j, truth[j]));
    ok = ok && final_ < first;
    detail += format(" %s %.4f -> %.4f", names[j].c_str(), first, final_);
  }
  return {ok, detail};
}

Outcome smoke_and_direction(const Context& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (const std::string model_name : {"blowfly", "hh"}) {
    const auto b = run_config(ctx, model_name + "_adaptive");
    const auto model = models::make_model(model_name);
    const PriorSpec prior = model->prior();
    std::size_t violations = 0;
    double worst_ratio = 0.0;
    for (const auto& r : b.results) {
      if (!r.ok) continue;
      const auto& it = r.record.iterations.back();
      for (std::size_t j = 0; j < prior.size(); ++j) {
        const double s0 = std::sqrt(prior.variance(j));
        if (it.phi.std(j) > s0) ++violations;
        if (r.posterior_stds[j] > s0 * (1.0 + 1e-6)) ++violations;
        worst_ratio = std::max(worst_ratio, r.posterior_stds[j] / s0);
      }
    }
    const bool enough = static_cast<double>(b.succeeded) >= 0.8 * static_cast<double>(b.trials);
    ok = ok && enough && violations == 0;
    detail += format("%s: %zu/%zu trials ok, %zu std violations, max posterior/prior std %.3f; ", model->name().c_str(),
                     b.succeeded, b.trials, violations, worst_ratio);
  }
  return {ok, detail + format("%.1f s", seconds_since(t0))};
}

Outcome gp_time_ratio(const Context&) {
  const auto model = models::make_model("blowfly");
  const auto observed = model->simulate(model->truth(), derive_seed(12345, StreamPurpose::data, {0}));
  inference::IgprOptions o;
  o.standardize_distance = true;
  const auto schedule = inference::TemperingSchedule::zeros(1);
  double small = 0.0, large = 0.0;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    small += inference::adaptive_igpr(*model, model->prior(), observed, 100, schedule, 1.0, s, o)
                 .record.iterations.back()
                 .gp_seconds;
    large += inference::adaptive_igpr(*model, model->prior(), observed, 1000, schedule, 0.2, s, o)
                 .record.iterations.back()
                 .gp_seconds;
  }
  const double ratio = large / small;
  return {ratio < 5.0, format("GP time m=1000 (200 local) %.3f s vs m=100 (all) %.3f s over 3 runs: ratio %.2f (< 5)",
                              large, small, ratio)};
}

Outcome statistics_contract(const Context&) {
  std::string bad;
  stats::TimeSeries constant{std::vector<double>(100, -1.5), 1.0};
  const auto c = stats::summary_stats(constant);
  for (std::size_t i = 0; i < stats::kSummarySize; ++i)
    if (c[i] != (i == 0 ? 1.5 : 0.0)) bad += format(" constant[%zu]=%g", i, c[i]);

  stats::TimeSeries tone{{}, 1e-3};
  for (int i = 0; i < 1000; ++i) tone.values.push_back(std::sin(2.0 * M_PI * 5.0 * i * tone.dt));
  const auto psd = stats::periodogram(tone.values, tone.dt);
  const auto peak = std::max_element(psd.begin(), psd.end()) - psd.begin() + 1;
  if (peak != 5) bad += format(" sinusoid peak bin %td", peak);

  stats::TimeSeries ramp{{}, 0.01};
  for (int i = 0; i < 500; ++i) ramp.values.push_back(3.0 * i * ramp.dt);
  const auto r = stats::summary_stats(ramp);
  if (std::abs(r[4] - 3.0) > 1e-12 || r[5] != 0.0 || r[6] != 0.0 || r[7] != 0.0)
    bad += format(" ramp velocity block (%g, %g, %g, %g)", r[4], r[5], r[6], r[7]);

  SplitMix64 rng(2718);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(1'000'000);
  for (double& v : x) v = n(rng);
  const auto m = stats::moments(x);
  const double dev = std::max({std::abs(m.mean), std::abs(m.variance - 1.0), std::abs(m.skewness),
                               std::abs(m.kurtosis - 3.0)});
  if (dev > 0.02) bad += format(" Gaussian moment deviation %.4f", dev);
  return {bad.empty(), bad.empty() ? format("examples exact; 1e6 Gaussian moments within %.4f (tol 0.02)", dev)
                                   : "failed:" + bad};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  Context ctx{"oracle_cache", "acceptance_runs"};
  std::vector<int> only;
  app.add_option("--cache", ctx.cache, "Oracle cache directory");
  app.add_option("--work", ctx.work, "Directory for result bundles");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"GP algebra vs joint-Gaussian conditioning", gp_algebra},
      {"duplicated-input closed form", duplicated_inputs},
      {"proposal correction identities", proposal_identities},
      {"toy posterior, 45 simulations", toy_reproduction},
      {"convergence to the rejection posterior mean", convergence_ladder},
      {"S-system errors, m=200 T=10", s_system_reproduction},
      {"S-system error decay over iterations", s_system_error_decay},
      {"blowfly and Hodgkin-Huxley smoke and std bound", smoke_and_direction},
      {"GP time growth from m=100 to m=1000", gp_time_ratio},
      {"summary statistics contract", statistics_contract},
  };
  const std::set<int> selected(only.begin(), only.end());
  fs::create_directories(ctx.work);

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
