#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "igpr/error.hpp"
#include "igpr/gp/kernel.hpp"
#include "igpr/gp/nelder_mead.hpp"
#include "igpr/gp/training_set.hpp"
#include "igpr/random.hpp"

namespace igpr::gp {

/// Lower bound on the noise variance and the largest diagonal jitter tried
/// before a factorisation is declared singular.
struct NuggetPolicy {
  double floor;
  double cap;

  static NuggetPolicy for_responses(const TrainingSet& train) {
    const double var = train.response_variance();
    const double scale = var > 0.0 ? var : 1.0;
    const double floor = std::max(1e-8 * var, 1e-12);
    return {floor, std::max(1e-4 * scale, 10.0 * floor)};
  }
};

/// Cholesky factor of a Gram matrix plus the extra diagonal jitter that was
/// needed to obtain it.
struct GramFactor {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
};

namespace detail {

inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index m = x.rows();
  Eigen::MatrixXd d2(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    d2(i, i) = 0.0;
    for (Eigen::Index k = i + 1; k < m; ++k) {
      const double v = (x.row(i) - x.row(k)).squaredNorm();
      d2(i, k) = v;
      d2(k, i) = v;
    }
  }
  return d2;
}

inline Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const KernelSpec& kernel) {
  const Eigen::Index m = x.rows();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i, i) = kernel.signal_variance;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      double r2 = 0.0;
      if (kernel.isotropic()) {
        r2 = (x.row(i) - x.row(j)).squaredNorm() / (kernel.lengthscales[0] * kernel.lengthscales[0]);
      } else {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
          const double d = (x(i, c) - x(j, c)) / kernel.lengthscales[c];
          r2 += d * d;
        }
      }
      const double v = kernel.from_scaled_sq_dist(r2);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

inline Eigen::MatrixXd gram_from_sq_dist(const Eigen::MatrixXd& d2, const KernelSpec& kernel) {
  const double inv_l2 = 1.0 / (kernel.lengthscales[0] * kernel.lengthscales[0]);
  const Eigen::Index m = d2.rows();
  Eigen::MatrixXd k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    k(i, i) = kernel.signal_variance;
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double v = kernel.from_scaled_sq_dist(d2(i, j) * inv_l2);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

}  // namespace detail

/// Factorises K + noise I, escalating a diagonal jitter by x10 from ten times
/// the floor up to the cap. Throws NumericalFailure carrying the reciprocal
/// condition estimate of K + noise I when every attempt fails.
inline GramFactor factorize(Eigen::MatrixXd k, double noise, const NuggetPolicy& policy) {
  k.diagonal().array() += noise;
  GramFactor f;
  f.llt.compute(k);
  if (f.llt.info() == Eigen::Success) return f;
  for (double jitter = 10.0 * policy.floor; jitter <= policy.cap * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    f.llt.compute(kj);
    if (f.llt.info() == Eigen::Success) {
      f.jitter = jitter;
      return f;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double rcond = ev.maxCoeff() > 0.0 ? ev.minCoeff() / ev.maxCoeff() : 0.0;
  throw NumericalFailure("Gram matrix not positive definite after nugget escalation to " +
                             std::to_string(policy.cap) + " (reciprocal condition " +
                             std::to_string(rcond) + ")",
                         rcond);
}

namespace detail {

inline double lml_from_factor(const GramFactor& f, const Eigen::VectorXd& y, double mean_const) {
  const Eigen::VectorXd r = y.array() - mean_const;
  const Eigen::VectorXd alpha = f.llt.solve(r);
  const Eigen::MatrixXd& l = f.llt.matrixLLT();
  const double log_det_half = l.diagonal().array().log().sum();
  return -0.5 * r.dot(alpha) - log_det_half -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

}  // namespace detail

/// Log density of the responses under N(mean_const, K(X,X) + noise I).
inline double log_marginal_likelihood(const TrainingSet& train, const GPHyperparams& hp) {
  hp.kernel.validate(static_cast<std::size_t>(train.dim()));
  const auto policy = NuggetPolicy::for_responses(train);
  const GramFactor f = factorize(detail::gram(train.inputs(), hp.kernel), hp.noise_variance, policy);
  return detail::lml_from_factor(f, train.responses(), hp.mean_const);
}

/// Noisy predictive distribution at `query`: the returned variance includes
/// the observation noise, so it is never below `noise_variance`.
inline GaussianPrediction gp_predict(const TrainingSet& train, const GPHyperparams& hp,
                                     std::span<const double> query) {
  if (static_cast<Eigen::Index>(query.size()) != train.dim())
    throw InvalidArgument("query has dimension " + std::to_string(query.size()) +
                          " but training inputs have " + std::to_string(train.dim()));
  hp.kernel.validate(query.size());
  const auto policy = NuggetPolicy::for_responses(train);
  const GramFactor f = factorize(detail::gram(train.inputs(), hp.kernel), hp.noise_variance, policy);

  const Eigen::Index m = train.size();
  Eigen::VectorXd kstar(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd row = train.inputs().row(i);
    kstar(i) = hp.kernel.from_scaled_sq_dist(
        hp.kernel.scaled_sq_dist(std::span<const double>(row.data(), row.size()), query));
  }
  const Eigen::VectorXd r = train.responses().array() - hp.mean_const;
  const double mean = hp.mean_const + kstar.dot(f.llt.solve(r));
  const Eigen::VectorXd v = f.llt.matrixL().solve(kstar);
  const double variance =
      std::max(hp.kernel.signal_variance - v.squaredNorm() + hp.noise_variance, hp.noise_variance);
  return {mean, variance};
}

struct FitConfig {
  KernelFamily family = KernelFamily::squared_exponential;
  bool ard = false;
  int restarts = 3;
  int max_iterations = 200;
  std::uint64_t seed = 0;
  double rq_alpha = 1.0;
  /// Signal variance used when only one training point is available.
  std::optional<double> prior_variance;
  /// Explicit starting points in log-parameter space
  /// (log lengthscales..., log signal variance, log noise variance). When
  /// empty the default initialisation and seeded perturbations are used.
  std::vector<Eigen::VectorXd> starts;
  /// Lengthscales are searched within exp(-span_below) .. exp(span_above)
  /// times the median pairwise input distance. Shorter lengthscales let a
  /// handful of points be interpolated exactly, collapsing the noise term.
  double lengthscale_span_below = 0.0;
  double lengthscale_span_above = 7.0;
};

/// Maximises the log marginal likelihood over (lengthscales, signal variance,
/// noise variance) in log space. The constant mean is the response average.
class HyperparameterSearch {
 public:
  HyperparameterSearch(const TrainingSet& train, FitConfig config)
      : train_(train), config_(std::move(config)), policy_(NuggetPolicy::for_responses(train)) {
    const Eigen::Index d = train_.dim();
    n_ls_ = config_.ard ? d : 1;
    if (!config_.ard) d2_ = detail::squared_distances(train_.inputs());

    const double var = train_.response_variance();
    scale_ = var > 0.0 ? var : 1.0;
    mean_ = train_.response_mean();

    init_.resize(n_ls_ + 2);
    if (config_.ard) {
      for (Eigen::Index c = 0; c < d; ++c) init_(c) = std::log(median_pairwise(c));
    } else {
      init_(0) = std::log(median_pairwise(-1));
    }
    init_(n_ls_) = std::log(scale_);
    init_(n_ls_ + 1) = std::log(std::max(0.1 * scale_, policy_.floor));

    lower_.resize(n_ls_ + 2);
    upper_.resize(n_ls_ + 2);
    for (Eigen::Index c = 0; c < n_ls_; ++c) {
      lower_(c) = init_(c) - config_.lengthscale_span_below;
      upper_(c) = init_(c) + config_.lengthscale_span_above;
    }
    // A start on the lower bound sees a flat clamped objective on one side
    // and Nelder-Mead tends to stall there.
    for (Eigen::Index c = 0; c < n_ls_; ++c)
      init_(c) = std::min(std::max(init_(c), lower_(c) + 0.5), upper_(c));
    lower_(n_ls_) = std::log(scale_) - 12.0;
    upper_(n_ls_) = std::log(scale_) + 7.0;
    lower_(n_ls_ + 1) = std::log(policy_.floor);
    upper_(n_ls_ + 1) = std::log(scale_) + 5.0;
  }

  const Eigen::VectorXd& default_start() const noexcept { return init_; }

  Eigen::VectorXd clamp(const Eigen::VectorXd& p) const {
    return p.cwiseMax(lower_).cwiseMin(upper_);
  }

  GPHyperparams hyperparams(const Eigen::VectorXd& log_params) const {
    const Eigen::VectorXd p = clamp(log_params);
    GPHyperparams hp;
    hp.kernel.family = config_.family;
    hp.kernel.rq_alpha = config_.rq_alpha;
    hp.kernel.lengthscales.resize(static_cast<std::size_t>(n_ls_));
    for (Eigen::Index c = 0; c < n_ls_; ++c) hp.kernel.lengthscales[c] = std::exp(p(c));
    hp.kernel.signal_variance = std::exp(p(n_ls_));
    hp.noise_variance = std::max(std::exp(p(n_ls_ + 1)), policy_.floor);
    hp.mean_const = mean_;
    return hp;
  }

  /// Objective at a log-parameter point, -inf when the Gram matrix cannot be
  /// factorised.
  double objective(const Eigen::VectorXd& log_params) const {
    const GPHyperparams hp = hyperparams(log_params);
    try {
      const Eigen::MatrixXd k = config_.ard ? detail::gram(train_.inputs(), hp.kernel)
                                            : detail::gram_from_sq_dist(d2_, hp.kernel);
      const GramFactor f = factorize(k, hp.noise_variance, policy_);
      return detail::lml_from_factor(f, train_.responses(), hp.mean_const);
    } catch (const NumericalFailure&) {
      return -std::numeric_limits<double>::infinity();
    }
  }

  GPHyperparams run() const {
    std::vector<Eigen::VectorXd> starts = config_.starts;
    if (starts.empty()) {
      starts.push_back(init_);
      SplitMix64 rng(config_.seed);
      std::normal_distribution<double> jitter(0.0, 1.0);
      for (int r = 1; r < std::max(1, config_.restarts); ++r) {
        Eigen::VectorXd s = init_;
        for (Eigen::Index c = 0; c < s.size(); ++c) s(c) += jitter(rng);
        starts.push_back(s);
      }
    }

    NelderMeadOptions opt;
    opt.max_iterations = config_.max_iterations;
    Eigen::VectorXd best;
    double best_value = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
      if (s.size() != init_.size())
        throw InvalidArgument("explicit start has the wrong number of log-parameters");
      const auto res = nelder_mead_minimize(
          [this](const Eigen::VectorXd& p) { return -objective(p); }, clamp(s), opt);
      const double v = -res.value;
      if (v > best_value) {
        best_value = v;
        best = clamp(res.x);
      }
    }
    if (!std::isfinite(best_value))
      throw NumericalFailure("hyperparameter search failed from every start");
    return hyperparams(best);
  }

 private:
  double median_pairwise(Eigen::Index column) const {
    const auto& x = train_.inputs();
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(x.rows() * (x.rows() - 1) / 2));
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index k = i + 1; k < x.rows(); ++k)
        d.push_back(column < 0 ? (x.row(i) - x.row(k)).norm() : std::abs(x(i, column) - x(k, column)));
    if (d.empty()) return 1.0;
    auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
    std::nth_element(d.begin(), mid, d.end());
    return *mid > 0.0 ? *mid : 1.0;
  }

  const TrainingSet& train_;
  FitConfig config_;
  NuggetPolicy policy_;
  Eigen::Index n_ls_ = 1;
  Eigen::MatrixXd d2_;
  double scale_ = 1.0;
  double mean_ = 0.0;
  Eigen::VectorXd init_, lower_, upper_;
};

/// Maximum-likelihood hyperparameters. A single training point skips the
/// search: signal variance = prior variance, noise = signal, mean = response.
inline GPHyperparams gp_fit(const TrainingSet& train, const FitConfig& config = {}) {
  if (train.size() == 1) {
    GPHyperparams hp;
    hp.kernel.family = config.family;
    hp.kernel.rq_alpha = config.rq_alpha;
    hp.kernel.lengthscales.assign(config.ard ? static_cast<std::size_t>(train.dim()) : 1, 1.0);
    hp.kernel.signal_variance = config.prior_variance.value_or(1.0);
    hp.noise_variance = hp.kernel.signal_variance;
    hp.mean_const = train.responses()(0);
    return hp;
  }
  return HyperparameterSearch(train, config).run();
}

/// Indices whose distance is strictly below epsilon, in pool order.
inline std::vector<std::size_t> select_local(std::span<const double> distances, double epsilon) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < distances.size(); ++i)
    if (distances[i] < epsilon) out.push_back(i);
  return out;
}

/// Indices of the k smallest distances (ties broken by index), in pool order.
inline std::vector<std::size_t> select_nearest(std::span<const double> distances, std::size_t k) {
  std::vector<std::size_t> idx(distances.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  k = std::min(k, idx.size());
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return distances[a] < distances[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace igpr::gp
