#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/gp/regression.hpp"
#include "igpr/inference/gaussian.hpp"
#include "igpr/inference/posterior.hpp"
#include "igpr/inference/run_record.hpp"
#include "igpr/inference/schedule.hpp"
#include "igpr/models/model.hpp"
#include "igpr/prior.hpp"
#include "igpr/random.hpp"

namespace igpr::inference {

struct IgprOptions {
  /// Kernel family, ARD flag, restarts and iteration budget. The seed and the
  /// single-point prior variance are filled in per (iteration, dimension).
  gp::FitConfig fit;
  /// Divide every data coordinate by its per-iteration sample std before
  /// computing distances and fitting.
  bool standardize_distance = false;
  /// See combine_with_proposal. 1 keeps every phi_t no wider than phi0.
  double combine_floor_fraction = 1.0;
  /// Extra draws tried after a simulation failure before the run aborts.
  std::size_t max_resamples = 10;
  /// Nearest-neighbour set size when a fixed epsilon selects fewer than
  /// min_local points.
  std::size_t nearest_fallback = 20;
  std::size_t min_local = 2;
};

/// Euclidean distance between two data points.
inline double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw InvalidArgument("distance between points of dimension " + std::to_string(a.size()) +
                          " and " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/// The ceil(omega m)-th smallest distance. Membership is then delta <= epsilon.
inline double quantile_cutoff(std::span<const double> distances, double omega) {
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in (0, 1]");
  if (distances.empty()) throw InvalidArgument("quantile of an empty distance set");
  const double m = static_cast<double>(distances.size());
  auto k = static_cast<std::size_t>(std::ceil(omega * m - 1e-9));
  k = std::clamp<std::size_t>(k, 1, distances.size());
  std::vector<double> sorted(distances.begin(), distances.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

inline std::vector<std::size_t> select_within(std::span<const double> distances, double epsilon) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < distances.size(); ++i)
    if (distances[i] <= epsilon) out.push_back(i);
  return out;
}

using ParameterSampler = std::function<std::vector<double>(SplitMix64&)>;

struct SimulatedBatch {
  std::vector<std::vector<double>> thetas;
  std::vector<std::vector<double>> data;
  std::size_t failed_attempts = 0;
};

/// Draws and simulates m points for iteration t. Draw i uses child streams
/// indexed by (t, i, attempt); a failed simulation redraws theta.
inline SimulatedBatch simulate_batch(const models::SimulationModel& model, const ParameterSampler& sampler,
                                     std::size_t m, std::uint64_t seed, std::size_t t,
                                     std::size_t max_resamples) {
  SimulatedBatch batch;
  batch.thetas.reserve(m);
  batch.data.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::string last_error;
    bool ok = false;
    for (std::size_t attempt = 0; attempt <= max_resamples && !ok; ++attempt) {
      SplitMix64 draw_rng(derive_seed(seed, StreamPurpose::draw, {t, i, attempt}));
      std::vector<double> theta = sampler(draw_rng);
      try {
        std::vector<double> d =
            model.simulate(theta, derive_seed(seed, StreamPurpose::simulate, {t, i, attempt}));
        if (d.size() != model.n_data())
          throw SimulationFailure(model.name() + " returned " + std::to_string(d.size()) + " values");
        for (double v : d)
          if (!std::isfinite(v)) throw SimulationFailure(model.name() + " returned non-finite data");
        batch.thetas.push_back(std::move(theta));
        batch.data.push_back(std::move(d));
        ok = true;
      } catch (const SimulationFailure& e) {
        ++batch.failed_attempts;
        last_error = e.what();
      }
    }
    if (!ok)
      throw SimulationFailure("draw " + std::to_string(i) + " of iteration " + std::to_string(t) +
                              " failed " + std::to_string(max_resamples + 1) +
                              " times; last error: " + last_error);
  }
  return batch;
}

inline ParameterSampler gaussian_sampler(const IndependentGaussian& q) {
  return [q](SplitMix64& rng) { return q.sample(rng); };
}

inline ParameterSampler prior_sampler(const PriorSpec& prior) {
  return [prior](SplitMix64& rng) { return prior.sample(rng); };
}

struct LocalFit {
  IndependentGaussian psi;
  std::vector<bool> clipped;
  std::vector<std::size_t> n_local;
  double gp_seconds = 0.0;
};

namespace detail {

inline std::vector<double> coordinate_scales(const std::vector<std::vector<double>>& data) {
  const std::size_t d = data.front().size();
  std::vector<double> scale(d, 1.0);
  for (std::size_t c = 0; c < d; ++c) {
    double mean = 0.0;
    for (const auto& row : data) mean += row[c];
    mean /= static_cast<double>(data.size());
    double var = 0.0;
    for (const auto& row : data) var += (row[c] - mean) * (row[c] - mean);
    var /= static_cast<double>(data.size());
    if (var > 0.0) scale[c] = 1.0 / std::sqrt(var);
  }
  return scale;
}

inline void apply_scale(std::vector<double>& row, const std::vector<double>& scale) {
  for (std::size_t c = 0; c < row.size(); ++c) row[c] *= scale[c];
}

/// Per-dimension GP on the selected points, evaluated at the observation.
/// When clip_stds is given, predictive stds above it are clipped.
inline LocalFit fit_local(const std::vector<std::vector<double>>& inputs,
                          const std::vector<std::vector<double>>& thetas,
                          std::span<const double> query, const std::vector<std::size_t>& selected,
                          const std::vector<double>& prior_variances, const std::vector<double>* clip_stds,
                          const IgprOptions& options, std::uint64_t seed, std::size_t t) {
  const std::size_t n_theta = thetas.front().size();
  const auto start = std::chrono::steady_clock::now();

  Eigen::MatrixXd x(static_cast<Eigen::Index>(selected.size()), static_cast<Eigen::Index>(query.size()));
  for (std::size_t r = 0; r < selected.size(); ++r)
    for (std::size_t c = 0; c < query.size(); ++c)
      x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = inputs[selected[r]][c];

  std::vector<double> means(n_theta), stds(n_theta);
  std::vector<bool> clipped(n_theta, false);
  for (std::size_t j = 0; j < n_theta; ++j) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(selected.size()));
    for (std::size_t r = 0; r < selected.size(); ++r) y(static_cast<Eigen::Index>(r)) = thetas[selected[r]][j];
    const gp::TrainingSet train(x, std::move(y));
    gp::FitConfig cfg = options.fit;
    cfg.seed = derive_seed(seed, StreamPurpose::fit, {t, j});
    cfg.prior_variance = prior_variances[j];
    const gp::GPHyperparams hp = gp::gp_fit(train, cfg);
    const gp::GaussianPrediction pred = gp::gp_predict(train, hp, query);
    means[j] = pred.mean;
    stds[j] = std::sqrt(pred.variance);
    if (clip_stds != nullptr && stds[j] > (*clip_stds)[j]) {
      stds[j] = (*clip_stds)[j];
      clipped[j] = true;
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {IndependentGaussian(std::move(means), std::move(stds)), std::move(clipped),
          std::vector<std::size_t>(n_theta, selected.size()), secs};
}

inline void check_observed(const models::SimulationModel& model, const PriorSpec& prior,
                           std::span<const double> observed, std::size_t m) {
  if (m < 1) throw InvalidArgument("sample count m must be at least 1");
  if (observed.size() != model.n_data())
    throw InvalidArgument("observation has " + std::to_string(observed.size()) + " entries but " +
                          model.name() + " produces " + std::to_string(model.n_data()));
  if (prior.size() != model.n_theta())
    throw InvalidArgument("prior has " + std::to_string(prior.size()) + " dimensions but " +
                          model.name() + " has " + std::to_string(model.n_theta()) + " parameters");
}

/// Distances to the (possibly rescaled) observation; rescales inputs in place.
inline std::vector<double> prepare_distances(std::vector<std::vector<double>>& inputs,
                                             std::vector<double>& query, bool standardize) {
  if (standardize) {
    const auto scale = coordinate_scales(inputs);
    for (auto& row : inputs) apply_scale(row, scale);
    apply_scale(query, scale);
  }
  std::vector<double> delta(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) delta[i] = distance(inputs[i], query);
  return delta;
}

}  // namespace detail

struct BasicResult {
  IndependentGaussian psi;
  std::vector<std::size_t> n_local;
  bool nearest_fallback = false;
};

/// Prior draws, local selection by a fixed cut-off, one GP per parameter.
inline BasicResult basic_igpr(const models::SimulationModel& model, const PriorSpec& prior,
                              std::span<const double> observed, std::size_t m, double epsilon,
                              std::uint64_t seed, const IgprOptions& options = {}) {
  detail::check_observed(model, prior, observed, m);
  SimulatedBatch batch = simulate_batch(model, prior_sampler(prior), m, seed, 1, options.max_resamples);
  std::vector<double> query(observed.begin(), observed.end());
  const auto delta = detail::prepare_distances(batch.data, query, options.standardize_distance);

  std::vector<std::size_t> selected = gp::select_local(delta, epsilon);
  bool fallback = false;
  if (selected.size() < options.min_local) {
    selected = gp::select_nearest(delta, std::min(m, options.nearest_fallback));
    fallback = true;
  }
  std::vector<double> prior_var(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) prior_var[j] = prior.variance(j);
  LocalFit fit = detail::fit_local(batch.data, batch.thetas, query, selected, prior_var, nullptr,
                                   options, seed, 1);
  return {std::move(fit.psi), std::move(fit.n_local), fallback};
}

struct ProposalResult {
  WeightedGaussianPosterior posterior;
  IndependentGaussian psi;
  std::vector<bool> clipped;
  std::vector<bool> combine_fallback;
  std::vector<std::size_t> n_local;
  bool nearest_fallback = false;
};

/// Draws from the proposal q, fits the local GPs, clips their stds at the
/// prior stds, and corrects for q.
inline ProposalResult proposal_igpr(const models::SimulationModel& model, const PriorSpec& prior,
                                    const IndependentGaussian& q, std::span<const double> observed,
                                    std::size_t m, double epsilon, std::uint64_t seed,
                                    const IgprOptions& options = {}) {
  detail::check_observed(model, prior, observed, m);
  if (q.size() != prior.size()) throw InvalidArgument("proposal dimension differs from prior");
  const IndependentGaussian phi0 = prior_gaussian_moments(prior);
  SimulatedBatch batch = simulate_batch(model, gaussian_sampler(q),
                                        m, seed, 1, options.max_resamples);
  std::vector<double> query(observed.begin(), observed.end());
  const auto delta = detail::prepare_distances(batch.data, query, options.standardize_distance);

  std::vector<std::size_t> selected = gp::select_local(delta, epsilon);
  bool fallback = false;
  if (selected.size() < options.min_local) {
    selected = gp::select_nearest(delta, std::min(m, options.nearest_fallback));
    fallback = true;
  }
  std::vector<double> prior_var(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) prior_var[j] = phi0.variance(j);
  LocalFit fit = detail::fit_local(batch.data, batch.thetas, query, selected, prior_var, &phi0.stds(),
                                   options, seed, 1);
  Combined c = combine_with_proposal(fit.psi, q, phi0, options.combine_floor_fraction);
  return {WeightedGaussianPosterior(std::move(c.phi), phi0, prior), std::move(fit.psi),
          std::move(fit.clipped), std::move(c.fallback), std::move(fit.n_local), fallback};
}

struct AdaptiveResult {
  WeightedGaussianPosterior posterior;
  RunRecord record;
};

/// Tempered adaptive scheme: at iteration t draw m parameters from phi_{t-1}
/// (phi_0 = prior moments), perturb the simulated data with N(0, sigma_t^2 I),
/// keep the ceil(omega m) points nearest the observation, fit one GP per
/// parameter, clip at the prior stds and correct with q = phi_{t-1}.
inline AdaptiveResult adaptive_igpr(const models::SimulationModel& model, const PriorSpec& prior,
                                    std::span<const double> observed, std::size_t m,
                                    const TemperingSchedule& schedule, double omega, std::uint64_t seed,
                                    const IgprOptions& options = {}) {
  detail::check_observed(model, prior, observed, m);
  if (!(omega > 0.0 && omega <= 1.0)) throw InvalidArgument("omega must lie in (0, 1]");
  const auto start = std::chrono::steady_clock::now();
  const IndependentGaussian phi0 = prior_gaussian_moments(prior);
  std::vector<double> prior_var(prior.size());
  for (std::size_t j = 0; j < prior.size(); ++j) prior_var[j] = phi0.variance(j);

  RunRecord record;
  IndependentGaussian phi = phi0;
  std::size_t simulations = 0, failed = 0;
  double gp_seconds = 0.0;
  for (std::size_t t = 1; t <= schedule.size(); ++t) {
    const IndependentGaussian q = phi;
    SimulatedBatch batch = simulate_batch(model, gaussian_sampler(q),
                                          m, seed, t, options.max_resamples);
    simulations += m;
    failed += batch.failed_attempts;

    const double sigma = schedule.sigma(t);
    if (sigma > 0.0) {
      for (std::size_t i = 0; i < m; ++i) {
        SplitMix64 rng(derive_seed(seed, StreamPurpose::temper, {t, i}));
        std::normal_distribution<double> eta(0.0, sigma);
        for (double& v : batch.data[i]) v += eta(rng);
      }
    }
    std::vector<double> query(observed.begin(), observed.end());
    const auto delta = detail::prepare_distances(batch.data, query, options.standardize_distance);
    const double epsilon = quantile_cutoff(delta, omega);
    std::vector<std::size_t> selected = select_within(delta, epsilon);
    bool nn_fallback = false;
    if (selected.size() < options.min_local && m >= options.min_local) {
      selected = gp::select_nearest(delta, options.min_local);
      nn_fallback = true;
    }

    LocalFit fit = detail::fit_local(batch.data, batch.thetas, query, selected, prior_var, &phi0.stds(),
                                     options, seed, t);
    gp_seconds += fit.gp_seconds;
    Combined c = combine_with_proposal(fit.psi, q, phi0, options.combine_floor_fraction);
    phi = c.phi;

    IterationRecord it;
    it.t = t;
    it.sigma = sigma;
    it.epsilon = epsilon;
    it.n_local = std::move(fit.n_local);
    it.nearest_fallback = nn_fallback;
    it.proposal = q;
    it.psi = std::move(fit.psi);
    it.phi = phi;
    it.clipped = std::move(fit.clipped);
    it.combine_fallback = std::move(c.fallback);
    const WeightedGaussianPosterior post(phi, phi0, prior);
    for (std::size_t j = 0; j < prior.size(); ++j) {
      const auto mm = post.marginal_moments(j);
      it.posterior_means.push_back(mm.mean);
      it.posterior_stds.push_back(mm.std);
    }
    it.simulations = simulations;
    it.failed_simulations = failed;
    it.gp_seconds = gp_seconds;
    it.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    record.iterations.push_back(std::move(it));
  }
  return {WeightedGaussianPosterior(phi, phi0, prior), std::move(record)};
}

}  // namespace igpr::inference
