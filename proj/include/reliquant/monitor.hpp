#pragma once

// Reference "make safe" monitor used as a shipped fixture: three integer
// process readings and three flags, tripping when any reading crosses its
// threshold or both sensors are reported unhealthy, unless inhibited.
//
// Output columns: make_safe (0/1), cause bitmask (1 temperature,
// 2 pressure, 4 level, 8 sensors). The cause is reported even while inhibited.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"

namespace reliquant::monitor {

inline constexpr std::int64_t kTemperatureTrip = 24;  // trips at or above
inline constexpr std::int64_t kPressureTrip = 26;     // trips at or above
inline constexpr std::int64_t kLevelTrip = 1;         // trips at or below

enum Cause : std::int64_t {
  kTemperature = 1,
  kPressure = 2,
  kLevel = 4,
  kSensors = 8,
};

struct Inputs {
  std::int64_t temperature;
  std::int64_t pressure;
  std::int64_t level;
  bool sensor_a_ok;
  bool sensor_b_ok;
  bool inhibit;
};

/// The monitor needs three integer fields followed by three flags.
inline void check_domain_shape(const InputDomain& domain) {
  const auto& f = domain.fields();
  const bool ok = f.size() == 6 && f[0].kind == FieldKind::IntRange && f[1].kind == FieldKind::IntRange &&
                  f[2].kind == FieldKind::IntRange && f[3].kind == FieldKind::Flag &&
                  f[4].kind == FieldKind::Flag && f[5].kind == FieldKind::Flag;
  if (!ok) throw ValidationError("monitor needs a domain of 3 int fields followed by 3 flags");
}

inline Inputs read(std::span<const std::int64_t> v) {
  return {v[0], v[1], v[2], v[3] != 0, v[4] != 0, v[5] != 0};
}

inline std::int64_t expected_cause(const Inputs& in) {
  std::int64_t cause = 0;
  if (in.temperature >= kTemperatureTrip) cause |= kTemperature;
  if (in.pressure >= kPressureTrip) cause |= kPressure;
  if (in.level <= kLevelTrip) cause |= kLevel;
  if (!in.sensor_a_ok && !in.sensor_b_ok) cause |= kSensors;
  return cause;
}

/// "Conditions require make safe".
inline bool make_safe_required(const Inputs& in) { return !in.inhibit && expected_cause(in) != 0; }

inline std::vector<std::string> expected_outputs(const Inputs& in) {
  return {make_safe_required(in) ? "1" : "0", std::to_string(expected_cause(in))};
}

/// The implementation under test, written as margin checks. With
/// `mutated` the temperature comparison is off by one (trips only above
/// the threshold).
inline std::vector<std::string> run(const Inputs& in, bool mutated) {
  const std::int64_t temperature_margin = kTemperatureTrip - in.temperature;
  const std::int64_t pressure_margin = kPressureTrip - in.pressure;
  const std::int64_t level_margin = in.level - kLevelTrip;
  std::int64_t cause = 0;
  if (mutated ? temperature_margin < 0 : temperature_margin <= 0) cause |= kTemperature;
  if (pressure_margin <= 0) cause |= kPressure;
  if (level_margin <= 0) cause |= kLevel;
  if (!(in.sensor_a_ok || in.sensor_b_ok)) cause |= kSensors;
  const bool trip = cause != 0 && !in.inhibit;
  return {trip ? "1" : "0", std::to_string(cause)};
}

}  // namespace reliquant::monitor
