#pragma once

// Zero-failure ("balls and urn") reliability demonstration.
//
// Per demand: after N independent failure-free demands drawn from the
// operational distribution, a probability of failure per demand p is
// claimed at confidence C when (1-p)^N <= 1-C.
//
// Per hour: under a constant failure rate (exponential model), T
// failure-free hours support rate lambda at confidence C when
// exp(-lambda T) <= 1-C.
//
// Assumptions of use: demands are independent, the operational
// distribution is fixed, and the pass/fail verdict is deterministic.
// Everything is evaluated through log1p/expm1 so tiny p and huge N keep
// full precision.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "reliquant/error.hpp"
#include "reliquant/numeric.hpp"

namespace reliquant {

enum class Basis { PerDemand, PerHour };

inline std::string_view to_string(Basis b) { return b == Basis::PerDemand ? "per-demand" : "per-hour"; }

struct ReliabilityTarget {
  double bound = 0.0;  // pfd, or failures per hour
  double confidence = 0.0;
  Basis basis = Basis::PerDemand;
};

struct TestRequirement {
  Basis basis = Basis::PerDemand;
  std::uint64_t count = 0;  // PerDemand
  double hours = 0.0;       // PerHour
};

struct DemandEvidence {
  std::uint64_t tests_executed = 0;
  std::uint64_t failures = 0;
};

struct DurationEvidence {
  double hours = 0.0;
  std::uint64_t failures = 0;
};

struct DemonstratedClaim {
  double bound = 0.0;
  double confidence = 0.0;
  std::variant<DemandEvidence, DurationEvidence> evidence;
  Basis basis = Basis::PerDemand;
};

namespace detail {

inline void require_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) {
    throw ValidationError(std::string(what) + " must lie strictly inside (0,1), got " + to_shortest_string(x));
  }
}

inline void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw ValidationError(std::string(what) + " must be positive and finite, got " + to_shortest_string(x));
  }
}

// Largest count for which a double still represents every integer.
inline constexpr double max_exact_count = 9007199254740992.0;  // 2^53

}  // namespace detail

/// Smallest N with (1-pfd)^N <= 1-confidence.
inline std::uint64_t required_test_count(double pfd, double confidence) {
  detail::require_open_unit(pfd, "pfd");
  detail::require_open_unit(confidence, "confidence");
  const long double log_survival = std::log1p(-static_cast<long double>(pfd));       // ln(1-p) < 0
  const long double log_target = std::log1p(-static_cast<long double>(confidence));  // ln(1-C) < 0
  const long double ratio = log_target / log_survival;
  if (!(ratio < detail::max_exact_count)) {
    throw ValidationError("required test count exceeds 2^53; pfd too small to plan as a count");
  }
  auto n = static_cast<std::uint64_t>(std::ceil(ratio));
  if (n == 0) n = 1;
  // Guard the ceiling against rounding in the ratio.
  auto satisfied = [&](std::uint64_t k) { return static_cast<long double>(k) * log_survival <= log_target; };
  while (!satisfied(n)) ++n;
  while (n > 1 && satisfied(n - 1)) --n;
  return n;
}

/// 1 - (1-pfd)^tests: confidence that pfd is not exceeded after `tests`
/// failure-free demands.
inline double achieved_confidence(double pfd, std::uint64_t tests) {
  detail::require_open_unit(pfd, "pfd");
  if (tests == 0) return 0.0;
  return -std::expm1(static_cast<double>(tests) * std::log1p(-pfd));
}

/// 1 - (1-confidence)^(1/tests): tightest pfd claimable after `tests`
/// failure-free demands.
inline double demonstrated_pfd(std::uint64_t tests, double confidence) {
  if (tests == 0) throw ValidationError("tests must be at least 1");
  detail::require_open_unit(confidence, "confidence");
  return -std::expm1(std::log1p(-confidence) / static_cast<double>(tests));
}

/// Failure-free hours T with 1 - exp(-rate T) = confidence.
inline double required_test_hours(double rate, double confidence) {
  detail::require_positive(rate, "rate");
  detail::require_open_unit(confidence, "confidence");
  return -std::log1p(-confidence) / rate;
}

/// Rate demonstrated by `hours` failure-free hours at `confidence`.
inline double demonstrated_failure_rate(double hours, double confidence) {
  detail::require_positive(hours, "hours");
  detail::require_open_unit(confidence, "confidence");
  return -std::log1p(-confidence) / hours;
}

inline void validate(const ReliabilityTarget& target) {
  if (target.basis == Basis::PerDemand) {
    detail::require_open_unit(target.bound, "pfd");
  } else {
    detail::require_positive(target.bound, "rate");
  }
  detail::require_open_unit(target.confidence, "confidence");
}

inline TestRequirement plan(const ReliabilityTarget& target) {
  validate(target);
  TestRequirement req;
  req.basis = target.basis;
  if (target.basis == Basis::PerDemand) {
    req.count = required_test_count(target.bound, target.confidence);
  } else {
    req.hours = required_test_hours(target.bound, target.confidence);
  }
  return req;
}

/// Claim supported by demand evidence; empty unless failure-free.
inline std::optional<DemonstratedClaim> claim_from(const DemandEvidence& evidence, double confidence) {
  if (evidence.failures != 0 || evidence.tests_executed == 0) return std::nullopt;
  return DemonstratedClaim{demonstrated_pfd(evidence.tests_executed, confidence), confidence, evidence,
                           Basis::PerDemand};
}

inline std::optional<DemonstratedClaim> claim_from(const DurationEvidence& evidence, double confidence) {
  if (evidence.failures != 0 || !(evidence.hours > 0.0)) return std::nullopt;
  return DemonstratedClaim{demonstrated_failure_rate(evidence.hours, confidence), confidence, evidence,
                           Basis::PerHour};
}

}  // namespace reliquant
