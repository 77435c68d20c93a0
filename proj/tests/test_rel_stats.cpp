#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "reliquant/numeric.hpp"
#include "reliquant/rel_stats.hpp"

using namespace reliquant;
using Big = boost::multiprecision::cpp_dec_float_100;

namespace {

// 100-digit oracles. Inputs are converted from the exact binary doubles.
Big big(double x) { return Big(x); }

std::uint64_t oracle_count(double p, double c) {
  const Big ratio = log(1 - big(c)) / log(1 - big(p));
  return static_cast<std::uint64_t>(ceil(ratio));
}

Big oracle_confidence(double p, std::uint64_t n) { return 1 - pow(1 - big(p), Big(n)); }
Big oracle_pfd(std::uint64_t n, double c) { return 1 - pow(1 - big(c), 1 / Big(n)); }
Big oracle_hours(double rate, double c) { return -log(1 - big(c)) / big(rate); }

double rel(double got, const Big& want) { return static_cast<double>(abs((Big(got) - want) / want)); }

}  // namespace

TEST(RequiredTestCount, HeadlineCount) {
  const auto n = required_test_count(1e-6, 0.99);
  EXPECT_EQ(n, 4605168u);
  EXPECT_EQ(n, oracle_count(1e-6, 0.99));
  EXPECT_EQ(format_significant(static_cast<double>(n)), "4.61e6");
  // Frozen 60-digit value of ln(0.01)/ln(1-1e-6): 4605167.8834026146...
  EXPECT_NEAR(static_cast<double>(log(Big(0.01)) / log(1 - big(1e-6))), 4605167.8834026146, 1e-6);
}

TEST(RequiredTestCount, IsTheSmallestSufficientCount) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> log_p(-9.0, -0.05);
  std::uniform_real_distribution<double> c(0.01, 0.9999);
  for (int i = 0; i < 2000; ++i) {
    const double p = std::pow(10.0, log_p(rng));
    const double conf = c(rng);
    const auto n = required_test_count(p, conf);
    ASSERT_EQ(n, oracle_count(p, conf)) << "p=" << p << " C=" << conf;
    ASSERT_GE(oracle_confidence(p, n), big(conf));
    if (n > 1) {
      ASSERT_LT(oracle_confidence(p, n - 1), big(conf));
    }
  }
}

TEST(RequiredTestCount, Monotonicity) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double p = std::pow(10.0, -8.0 * u(rng)) * 0.5;
    const double c = 0.01 + 0.98 * u(rng);
    const double bigger_p = p + (0.9 - p) * u(rng);
    const double bigger_c = c + (0.999 - c) * u(rng);
    ASSERT_GE(required_test_count(p, c), required_test_count(bigger_p, c));
    ASSERT_LE(required_test_count(p, c), required_test_count(p, bigger_c));
  }
}

TEST(RequiredTestCount, StableAtExtremeTargets) {
  // ln(0.001)/ln(1-1e-9) = 6907755275.528259411987...
  EXPECT_EQ(required_test_count(1e-9, 0.999), 6907755276u);
  EXPECT_EQ(required_test_count(1e-9, 0.999), oracle_count(1e-9, 0.999));
  EXPECT_EQ(required_test_count(0.5, 0.5), 1u);
  EXPECT_EQ(required_test_count(0.9, 0.01), 1u);
  EXPECT_THROW(required_test_count(1e-300, 0.99), ValidationError);
}

TEST(RequiredTestCount, RejectsOutOfRangeArguments) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double bad : {0.0, 1.0, -0.1, 1.5, nan}) {
    EXPECT_THROW(required_test_count(bad, 0.99), ValidationError) << bad;
    EXPECT_THROW(required_test_count(1e-3, bad), ValidationError) << bad;
    EXPECT_THROW(demonstrated_pfd(10, bad), ValidationError) << bad;
    EXPECT_THROW(required_test_hours(1e-3, bad), ValidationError) << bad;
    EXPECT_THROW(achieved_confidence(bad, 10), ValidationError) << bad;
  }
  for (double bad : {0.0, -1.0, nan, std::numeric_limits<double>::infinity()}) {
    EXPECT_THROW(required_test_hours(bad, 0.99), ValidationError) << bad;
    EXPECT_THROW(demonstrated_failure_rate(bad, 0.99), ValidationError) << bad;
  }
  EXPECT_THROW(demonstrated_pfd(0, 0.99), ValidationError);
}

TEST(AchievedConfidence, MatchesOracle) {
  // 0.990000001165974368916...
  EXPECT_LT(rel(achieved_confidence(1e-6, 4605168), Big("0.990000001165974368916")), 1e-15);
  EXPECT_EQ(achieved_confidence(0.1, 0), 0.0);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    const double p = std::pow(10.0, std::uniform_real_distribution<double>(-9, -0.1)(rng));
    const auto n = std::uniform_int_distribution<std::uint64_t>(1, 10'000'000'000ULL)(rng);
    const Big want = oracle_confidence(p, n);
    if (want < Big("1e-300")) continue;
    ASSERT_LT(rel(achieved_confidence(p, n), want), 1e-9) << p << " " << n;
  }
}

TEST(AchievedConfidence, MonotoneInTests) {
  for (std::uint64_t n = 1; n < 5000; n += 37) {
    ASSERT_LE(achieved_confidence(1e-3, n), achieved_confidence(1e-3, n + 1));
  }
}

TEST(DemonstratedPfd, MatchesOracle) {
  EXPECT_LT(rel(demonstrated_pfd(4605168, 0.99), Big("9.99999974681200101e-7")), 1e-12);
  EXPECT_LE(demonstrated_pfd(4605168, 0.99), 1e-6);
  EXPECT_LT(rel(demonstrated_pfd(1'000'000, 0.99), Big("4.60515958220814782123824e-6")), 1e-12);
  EXPECT_LT(rel(demonstrated_pfd(6907755276ULL, 0.999), Big("9.99999999931708555250087e-10")), 1e-12);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto n = std::uniform_int_distribution<std::uint64_t>(1, 1'000'000'000'000ULL)(rng);
    const double c = std::uniform_real_distribution<double>(0.01, 0.99999)(rng);
    ASSERT_LT(rel(demonstrated_pfd(n, c), oracle_pfd(n, c)), 1e-12) << n << " " << c;
  }
}

TEST(DemonstratedPfd, TightnessAndMonotonicity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const auto n = std::uniform_int_distribution<std::uint64_t>(1, 100'000'000)(rng);
    const double c = 0.05 + 0.9 * u(rng);
    const double bound = demonstrated_pfd(n, c);
    // The bound reproduces the requested confidence.
    ASSERT_NEAR(achieved_confidence(bound, n), c, 1e-9);
    ASSERT_GE(bound, demonstrated_pfd(n + 1, c));
    ASSERT_LE(bound, demonstrated_pfd(n, c + (0.999 - c) * u(rng)));
    // Planning for the demonstrated bound never needs more than n tests.
    ASSERT_LE(required_test_count(bound * (1 + 1e-12), c), n);
  }
}

TEST(PerHour, HeadlineHours) {
  const double hours = required_test_hours(1e-6, 0.99);
  EXPECT_LT(rel(hours, Big("4605170.18598809136803598290936872841520220")), 1e-12);
  EXPECT_LT(rel(hours, oracle_hours(1e-6, 0.99)), 1e-6);
  EXPECT_EQ(format_magnitude_words(hours), "4.61 million");
  EXPECT_LT(rel(required_test_hours(2e-6, 0.99), Big("2302585.09299404568401799145")), 1e-12);
  EXPECT_LT(rel(demonstrated_failure_rate(1e9, 0.99), Big("4.60517018598809136803598e-9")), 1e-12);
}

TEST(PerHour, InverseAndMonotone) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double rate = std::pow(10.0, -10.0 * u(rng));
    const double c = 0.01 + 0.98 * u(rng);
    const double t = required_test_hours(rate, c);
    ASSERT_LT(rel(t, oracle_hours(rate, c)), 1e-12);
    ASSERT_NEAR(demonstrated_failure_rate(t, c) / rate, 1.0, 1e-14);
    ASSERT_GE(t, required_test_hours(rate * (1 + u(rng)), c));
    ASSERT_LE(t, required_test_hours(rate, c + (0.999 - c) * u(rng)));
  }
}

TEST(Plan, DispatchesOnBasis) {
  const auto demand = plan({1e-6, 0.99, Basis::PerDemand});
  EXPECT_EQ(demand.basis, Basis::PerDemand);
  EXPECT_EQ(demand.count, 4605168u);
  const auto hourly = plan({1e-6, 0.99, Basis::PerHour});
  EXPECT_EQ(hourly.basis, Basis::PerHour);
  EXPECT_NEAR(hourly.hours, 4605170.185988091, 1e-6);
  EXPECT_THROW(plan({1.5, 0.99, Basis::PerDemand}), ValidationError);
  EXPECT_NO_THROW(plan({1.5, 0.99, Basis::PerHour}));
  EXPECT_THROW(plan({1e-3, 1.0, Basis::PerHour}), ValidationError);
}

TEST(Claims, OnlyFromFailureFreeEvidence) {
  EXPECT_FALSE(claim_from(DemandEvidence{1000, 1}, 0.99));
  EXPECT_FALSE(claim_from(DemandEvidence{0, 0}, 0.99));
  EXPECT_FALSE(claim_from(DurationEvidence{100.0, 2}, 0.99));
  const auto c = claim_from(DemandEvidence{1'000'000, 0}, 0.99);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->basis, Basis::PerDemand);
  EXPECT_DOUBLE_EQ(c->bound, demonstrated_pfd(1'000'000, 0.99));
  const auto h = claim_from(DurationEvidence{1e9, 0}, 0.99);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->basis, Basis::PerHour);
  EXPECT_DOUBLE_EQ(h->bound, demonstrated_failure_rate(1e9, 0.99));
}

TEST(Formatting, SignificantFigures) {
  EXPECT_EQ(format_significant(4605168), "4.61e6");
  EXPECT_EQ(format_significant(1.09999e-4), "1.1e-4");
  EXPECT_EQ(format_significant(0.0), "0");
  EXPECT_EQ(format_significant(1.0), "1");
  EXPECT_EQ(format_magnitude_words(6907755276.0), "6.91 billion");
  EXPECT_EQ(format_magnitude_words(12.5), "12.5");
}
