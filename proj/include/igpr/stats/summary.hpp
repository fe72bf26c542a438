#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "igpr/error.hpp"

namespace igpr::stats {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// Population moments. Kurtosis is the raw standardised fourth moment
/// (3 for a Gaussian). A sample whose spread is at rounding level relative to
/// its magnitude reports zero variance, skewness and kurtosis.
inline Moments moments(std::span<const double> x) {
  if (x.empty()) throw InvalidArgument("moments of an empty sample");
  const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  if (constant) return {x[0], 0.0, 0.0, 0.0};

  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double spread_floor = 1e-10 * scale;
  if (m2 <= spread_floor * spread_floor) return {mean, 0.0, 0.0, 0.0};

  Moments out{mean, m2, 0.0, 0.0};
  {
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
  }
  return out;
}

struct TimeSeries {
  std::vector<double> values;
  double dt = 1.0;
};

namespace detail {

// fftw planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int n) {
    std::lock_guard lock(mu_);
    auto it = plans_.find(n);
    if (it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan p = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, p);
    return p;
  }

  ~PlanCache() {
    for (auto& [n, p] : plans_) fftw_destroy_plan(p);
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<int, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

}  // namespace detail

/// One-sided periodogram of the mean-removed series at the positive
/// frequencies k = 1 .. floor(n/2), scaled by dt/n; interior bins are doubled.
inline std::vector<double> periodogram(std::span<const double> x, double dt) {
  const int n = static_cast<int>(x.size());
  if (n < 2) throw InvalidArgument("periodogram needs at least two samples");
  const bool constant = std::all_of(x.begin(), x.end(), [&](double v) { return v == x[0]; });
  const int half = n / 2;
  if (constant) return std::vector<double>(static_cast<std::size_t>(half), 0.0);

  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;

  std::unique_ptr<double, detail::FftwDeleter> in(fftw_alloc_real(static_cast<std::size_t>(n)));
  std::unique_ptr<fftw_complex, detail::FftwDeleter> out(
      fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1)));
  for (int i = 0; i < n; ++i) in.get()[i] = x[i] - mean;
  fftw_execute_dft_r2c(detail::PlanCache::instance().get(n), in.get(), out.get());

  std::vector<double> psd(static_cast<std::size_t>(half));
  const double scale = dt / static_cast<double>(n);
  for (int k = 1; k <= half; ++k) {
    const double re = out.get()[k][0], im = out.get()[k][1];
    const bool nyquist = (n % 2 == 0) && k == half;
    psd[k - 1] = (nyquist ? 1.0 : 2.0) * scale * (re * re + im * im);
  }
  return psd;
}

inline constexpr std::size_t kSummarySize = 16;
using SummaryVector = std::array<double, kSummarySize>;

/// Sixteen features ordered quantity-major: (|amplitude|, |velocity|,
/// |acceleration|, PSD) x (mean, variance, skewness, kurtosis).
inline SummaryVector summary_stats(const TimeSeries& series) {
  const auto& x = series.values;
  const std::size_t n = x.size();
  if (n < 4) throw InvalidArgument("summary statistics need at least 4 samples");
  if (!(series.dt > 0.0)) throw InvalidArgument("sampling interval must be positive");
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("time series contains non-finite values");

  std::vector<double> amp(n), vel(n - 1), acc(n - 2);
  for (std::size_t i = 0; i < n; ++i) amp[i] = std::abs(x[i]);
  const double dt = series.dt, dt2 = dt * dt;
  for (std::size_t i = 0; i + 1 < n; ++i) vel[i] = std::abs(x[i + 1] - x[i]) / dt;
  for (std::size_t i = 0; i + 2 < n; ++i) acc[i] = std::abs(x[i + 2] - 2.0 * x[i + 1] + x[i]) / dt2;
  const std::vector<double> psd = periodogram(x, dt);

  SummaryVector out{};
  std::size_t k = 0;
  for (const std::vector<double>* q : std::array<const std::vector<double>*, 4>{&amp, &vel, &acc, &psd}) {
    const Moments m = moments(*q);
    out[k++] = m.mean;
    out[k++] = m.variance;
    out[k++] = m.skewness;
    out[k++] = m.kurtosis;
  }
  return out;
}

}  // namespace igpr::stats
