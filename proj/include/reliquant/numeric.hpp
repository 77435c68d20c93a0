#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>

namespace reliquant {

/// Neumaier's variant of Kahan summation. Robust when addends have mixed
/// signs and magnitudes spanning many decades.
template <typename Real>
class CompensatedSum {
 public:
  void add(Real x) noexcept {
    const Real t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  Real value() const noexcept { return sum_ + compensation_; }

 private:
  Real sum_{0};
  Real compensation_{0};
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string to_shortest_string(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return ec == std::errc{} ? std::string(buf, end) : std::string("nan");
}

/// Parses a complete decimal or scientific literal. Rejects trailing junk,
/// leading '+', and non-finite values.
inline std::optional<double> parse_real(std::string_view text) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

/// `x` rounded to `digits` significant figures as mantissa/exponent text,
/// e.g. 4605168 -> "4.61e6", 0.00012 -> "1.2e-4". Trailing zeros are trimmed.
inline std::string format_significant(double x, int digits = 3) {
  if (x == 0.0) return "0";
  if (!std::isfinite(x)) return to_shortest_string(x);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, x);
  std::string text(buf);
  const auto e = text.find('e');
  std::string mantissa = text.substr(0, e);
  const int exponent = std::stoi(text.substr(e + 1));
  if (mantissa.find('.') != std::string::npos) {
    while (mantissa.back() == '0') mantissa.pop_back();
    if (mantissa.back() == '.') mantissa.pop_back();
  }
  if (exponent == 0) return mantissa;
  return mantissa + "e" + std::to_string(exponent);
}

/// Magnitude-word rendering at `digits` significant figures:
/// 4605170 -> "4.61 million". Values below a thousand are rendered plainly.
inline std::string format_magnitude_words(double x, int digits = 3) {
  struct Scale {
    double factor;
    const char* word;
  };
  static constexpr Scale scales[] = {
      {1e12, "trillion"}, {1e9, "billion"}, {1e6, "million"}, {1e3, "thousand"}};
  char buf[64];
  for (const auto& s : scales) {
    if (std::abs(x) >= s.factor) {
      const double scaled = x / s.factor;
      const int whole = static_cast<int>(std::floor(std::log10(std::abs(scaled)))) + 1;
      const int decimals = std::max(0, digits - whole);
      std::snprintf(buf, sizeof buf, "%.*f %s", decimals, scaled, s.word);
      return buf;
    }
  }
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace reliquant
