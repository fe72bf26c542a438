#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>

#include "igpr/random.hpp"
#include "igpr/stats/summary.hpp"

using namespace igpr;
using namespace igpr::stats;

TEST(Moments, ConstantSampleUsesZeroSpreadConvention) {
  const std::vector<double> x{1.0, 1.0, 1.0};
  const auto m = moments(x);
  EXPECT_EQ(m.mean, 1.0);
  EXPECT_EQ(m.variance, 0.0);
  EXPECT_EQ(m.skewness, 0.0);
  EXPECT_EQ(m.kurtosis, 0.0);
}

TEST(Moments, TwoPointSymmetricSample) {
  const std::vector<double> x{-1.0, 1.0};
  const auto m = moments(x);
  EXPECT_DOUBLE_EQ(m.mean, 0.0);
  EXPECT_DOUBLE_EQ(m.variance, 1.0);
  EXPECT_DOUBLE_EQ(m.skewness, 0.0);
  EXPECT_DOUBLE_EQ(m.kurtosis, 1.0);
}

TEST(Moments, EmptyThrows) {
  EXPECT_THROW(moments(std::vector<double>{}), InvalidArgument);
}

TEST(Moments, SkewedSampleMatchesHandComputation) {
  // x = (0, 0, 3): mean 1, m2 = 2, m3 = 2, m4 = 6.
  const std::vector<double> x{0.0, 0.0, 3.0};
  const auto m = moments(x);
  EXPECT_NEAR(m.variance, 2.0, 1e-14);
  EXPECT_NEAR(m.skewness, 2.0 / std::pow(2.0, 1.5), 1e-14);
  EXPECT_NEAR(m.kurtosis, 6.0 / 4.0, 1e-14);
}

TEST(Moments, LargeGaussianSample) {
  SplitMix64 rng(42);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(1000000);
  for (double& v : x) v = n(rng);
  const auto m = moments(x);
  EXPECT_NEAR(m.mean, 0.0, 0.02);
  EXPECT_NEAR(m.variance, 1.0, 0.02);
  EXPECT_NEAR(m.skewness, 0.0, 0.02);
  EXPECT_NEAR(m.kurtosis, 3.0, 0.02);
}

TEST(Periodogram, MatchesDirectFourierSum) {
  SplitMix64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int len : {7, 8, 33}) {
    std::vector<double> x(static_cast<std::size_t>(len));
    for (double& v : x) v = n(rng);
    const double dt = 0.1;
    const auto psd = periodogram(x, dt);
    ASSERT_EQ(psd.size(), static_cast<std::size_t>(len / 2));
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= len;
    for (int k = 1; k <= len / 2; ++k) {
      std::complex<double> s = 0.0;
      for (int i = 0; i < len; ++i) s += (x[i] - mean) * std::polar(1.0, -2.0 * M_PI * k * i / len);
      const double factor = (len % 2 == 0 && k == len / 2) ? 1.0 : 2.0;
      EXPECT_NEAR(psd[k - 1], factor * dt / len * std::norm(s), 1e-10) << "n " << len << " k " << k;
    }
  }
}

TEST(SummaryStats, ConstantSeries) {
  TimeSeries s{std::vector<double>(50, -2.5), 1.0};
  const auto v = summary_stats(s);
  EXPECT_EQ(v[0], 2.5);
  for (std::size_t i = 1; i < kSummarySize; ++i) EXPECT_EQ(v[i], 0.0) << "entry " << i;
}

TEST(SummaryStats, SinusoidPeaksAtItsBin) {
  TimeSeries s;
  s.dt = 1e-3;
  for (int i = 0; i < 1000; ++i) s.values.push_back(std::sin(2.0 * M_PI * 5.0 * i * s.dt));
  const auto psd = periodogram(s.values, s.dt);
  const auto peak = std::max_element(psd.begin(), psd.end()) - psd.begin();
  EXPECT_EQ(peak + 1, 5);  // psd[k - 1] holds frequency index k
}

TEST(SummaryStats, RampVelocityBlock) {
  TimeSeries s;
  s.dt = 0.01;
  for (int i = 0; i < 200; ++i) s.values.push_back(3.0 * i * s.dt);
  const auto v = summary_stats(s);
  EXPECT_NEAR(v[4], 3.0, 1e-12);
  EXPECT_EQ(v[5], 0.0);
  EXPECT_EQ(v[6], 0.0);
  EXPECT_EQ(v[7], 0.0);
}

TEST(SummaryStats, ShiftChangesOnlyAmplitudeBlock) {
  SplitMix64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  TimeSeries a{{}, 0.5};
  for (int i = 0; i < 256; ++i) a.values.push_back(n(rng));
  TimeSeries b = a;
  for (double& v : b.values) v += 10.0;
  const auto va = summary_stats(a), vb = summary_stats(b);
  EXPECT_GT(std::abs(va[0] - vb[0]), 1.0);
  for (std::size_t i = 4; i < kSummarySize; ++i)
    EXPECT_NEAR(va[i], vb[i], 1e-9 * std::max(1.0, std::abs(va[i]))) << "entry " << i;
}

TEST(SummaryStats, ScaleCovariance) {
  SplitMix64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  TimeSeries a{{}, 1.0};
  for (int i = 0; i < 300; ++i) a.values.push_back(n(rng));
  const double lambda = 3.5;
  TimeSeries b = a;
  for (double& v : b.values) v *= lambda;
  const auto va = summary_stats(a), vb = summary_stats(b);
  for (std::size_t block = 0; block < 3; ++block) {
    const std::size_t o = 4 * block;
    EXPECT_NEAR(vb[o], lambda * va[o], 1e-10 * vb[o]);
    EXPECT_NEAR(vb[o + 1], lambda * lambda * va[o + 1], 1e-10 * vb[o + 1]);
    EXPECT_NEAR(vb[o + 2], va[o + 2], 1e-9);
    EXPECT_NEAR(vb[o + 3], va[o + 3], 1e-9);
  }
}

TEST(SummaryStats, Deterministic) {
  TimeSeries s{{}, 0.1};
  for (int i = 0; i < 101; ++i) s.values.push_back(std::cos(0.3 * i) + 0.01 * i);
  EXPECT_EQ(summary_stats(s), summary_stats(s));
}

TEST(SummaryStats, RejectsShortOrNonFinite) {
  EXPECT_THROW(summary_stats(TimeSeries{{1.0, 2.0, 3.0}, 1.0}), InvalidArgument);
  EXPECT_THROW(summary_stats(TimeSeries{{1.0, 2.0, std::nan(""), 4.0}, 1.0}), InvalidArgument);
  EXPECT_THROW(summary_stats(TimeSeries{{1.0, 2.0, 3.0, 4.0}, 0.0}), InvalidArgument);
}
