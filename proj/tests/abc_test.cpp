#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "igpr/abc/rejection.hpp"
#include "igpr/models/toy1d.hpp"

using namespace igpr;
using namespace igpr::abc;

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("igpr_abc_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(AbcRej, IdentityAcceptanceRateMatchesIntervalMass) {
  const models::IdentityModel m({1, 0.0, -3.0, 3.0});
  const std::vector<double> obs{1.0};
  const auto r = abc_rej(m, m.prior(), obs, 0.1, 100000, std::numeric_limits<std::size_t>::max(), 5);
  EXPECT_EQ(r.attempts, 100000u);
  EXPECT_NEAR(r.acceptance_rate, 0.2 / 6.0, 0.005);
  for (const auto& th : r.accepted) {
    EXPECT_GT(th[0], 0.9);
    EXPECT_LT(th[0], 1.1);
  }
}

TEST(AbcRej, InfiniteEpsilonAcceptsEverything) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto r = abc_rej(m, m.prior(), obs, std::numeric_limits<double>::infinity(), 500, 1000, 1);
  EXPECT_EQ(r.accepted.size(), 500u);
  EXPECT_EQ(r.acceptance_rate, 1.0);
}

TEST(AbcRej, StopsAtTargetAcceptances) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto r = abc_rej(m, m.prior(), obs, 0.5, 100000, 25, 1);
  EXPECT_EQ(r.accepted.size(), 25u);
  EXPECT_LT(r.attempts, 100000u);
}

TEST(AbcRej, TinyEpsilonGivesFlaggedEmptyResult) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto r = abc_rej(m, m.prior(), obs, 1e-12, 2000, 10, 3);
  EXPECT_TRUE(r.empty);
  EXPECT_TRUE(r.accepted.empty());
  EXPECT_EQ(r.acceptance_rate, 0.0);
}

TEST(AbcRej, ShrinkingEpsilonAcceptsNestedSubsets) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const std::size_t big = std::numeric_limits<std::size_t>::max();
  std::size_t previous = big;
  for (double eps : {1.0, 0.3, 0.1, 0.03}) {
    const auto r = abc_rej(m, m.prior(), obs, eps, 20000, big, 11);
    EXPECT_LE(r.accepted.size(), previous) << eps;
    previous = r.accepted.size();
  }
}

TEST(AbcRej, RejectsBadArguments) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869}, two{0.1, 0.2};
  EXPECT_THROW(abc_rej(m, m.prior(), obs, 0.0, 10, 10, 1), InvalidArgument);
  EXPECT_THROW(abc_rej(m, m.prior(), obs, 0.1, 10, 0, 1), InvalidArgument);
  EXPECT_THROW(abc_rej(m, m.prior(), two, 0.1, 10, 10, 1), InvalidArgument);
}

TEST(Oracle, SymmetricProblemHasCentredMean) {
  const models::IdentityModel m({1, 0.1, -3.0, 3.0});
  const std::vector<double> obs{0.0};
  const auto e = oracle_posterior_mean(m, m.prior(), obs, 0.01, 200000, 2);
  EXPECT_GE(e.accepted, kMinOracleAcceptances);
  EXPECT_LT(std::abs(e.mean[0]), 3.0 * e.standard_error[0]);
  EXPECT_GT(e.standard_error[0], 0.0);
}

TEST(Oracle, HalvingEpsilonShiftsMeanByLessThanTwoStandardErrors) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto a = oracle_posterior_mean(m, m.prior(), obs, 1e-3, 10000000, 2024);
  const auto b = oracle_posterior_mean(m, m.prior(), obs, 5e-4, 10000000, 2025);
  const double pooled = std::hypot(a.standard_error[0], b.standard_error[0]);
  EXPECT_LT(std::abs(a.mean[0] - b.mean[0]), 2.0 * pooled);
}

TEST(Oracle, TooFewAcceptancesThrows) {
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  EXPECT_THROW(oracle_posterior_mean(m, m.prior(), obs, 1e-3, 1000, 1), NumericalFailure);
}

TEST(OracleCache, RoundTripAndKeying) {
  const fs::path dir = fresh_dir("cache");
  const OracleCache cache(dir);
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto first = cache.get_or_compute(m, m.prior(), obs, 0.05, 20000, 4);
  const auto key = OracleCache::key(m, obs, 0.05, 20000, 4);
  ASSERT_TRUE(fs::exists(cache.path_for(key)));
  const auto again = cache.get_or_compute(m, m.prior(), obs, 0.05, 20000, 4);
  EXPECT_EQ(first.mean, again.mean);
  EXPECT_EQ(first.standard_error, again.standard_error);
  EXPECT_EQ(first.accepted, again.accepted);

  EXPECT_NE(cache.path_for(key), cache.path_for(OracleCache::key(m, obs, 0.05, 20000, 5)));
  const models::Toy1d quiet({0.05, false});
  EXPECT_NE(cache.path_for(key), cache.path_for(OracleCache::key(quiet, obs, 0.05, 20000, 4)));
  fs::remove_all(dir);
}

TEST(OracleCache, CorruptFileIsRecomputed) {
  const fs::path dir = fresh_dir("corrupt");
  const OracleCache cache(dir);
  const models::Toy1d m;
  const std::vector<double> obs{0.869};
  const auto key = OracleCache::key(m, obs, 0.05, 20000, 4);
  fs::create_directories(dir);
  std::ofstream(cache.path_for(key)) << "{not json";
  EXPECT_FALSE(cache.load(key).has_value());
  const auto e = cache.get_or_compute(m, m.prior(), obs, 0.05, 20000, 4);
  ASSERT_TRUE(cache.load(key).has_value());
  EXPECT_EQ(cache.load(key)->mean, e.mean);
  fs::remove_all(dir);
}
