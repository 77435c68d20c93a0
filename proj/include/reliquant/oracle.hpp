#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/monitor.hpp"
#include "reliquant/predicate.hpp"
#include "reliquant/subject.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

struct Verdict {
  bool pass = true;
  std::string detail;  // expected output or violated condition when failing

  static Verdict ok() { return {}; }
  static Verdict fail(std::string why) { return {false, std::move(why)}; }
};

/// Decides pass/fail for one (input, output) pair. Shared read-only by all
/// workers, so judge() must be deterministic and thread-safe. Exceptions
/// thrown by judge() are recorded as oracle errors, never as passes.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual const std::string& id() const = 0;
  virtual Verdict judge(const InputPoint& input, const Output& output) const = 0;
};

/// Compares the whole output against a reference function.
class ExpectedFunctionOracle final : public Oracle {
 public:
  using Reference = std::function<Output(const InputPoint&)>;

  ExpectedFunctionOracle(std::string id, Reference reference) : id_(std::move(id)), reference_(std::move(reference)) {}

  const std::string& id() const override { return id_; }

  Verdict judge(const InputPoint& input, const Output& output) const override {
    Output expected = reference_(input);
    if (output == expected) return Verdict::ok();
    std::string joined;
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) joined += ',';
      joined += expected[i];
    }
    return Verdict::fail("expected " + joined);
  }

 private:
  std::string id_;
  Reference reference_;
};

/// Contract checking. When the precondition does not hold the case is
/// outside the contract and passes vacuously.
class PrePostOracle final : public Oracle {
 public:
  using Pre = std::function<bool(const InputPoint&)>;
  /// Returns an empty string when satisfied, else the violated condition.
  using Post = std::function<std::string(const InputPoint&, const Output&)>;

  PrePostOracle(std::string id, Pre pre, Post post) : id_(std::move(id)), pre_(std::move(pre)), post_(std::move(post)) {}

  const std::string& id() const override { return id_; }

  Verdict judge(const InputPoint& input, const Output& output) const override {
    if (!pre_(input)) return Verdict::ok();
    auto violation = post_(input, output);
    return violation.empty() ? Verdict::ok() : Verdict::fail("postcondition violated: " + violation);
  }

 private:
  std::string id_;
  Pre pre_;
  Post post_;
};

/// Checks a single make-safe output flag against a required-condition
/// predicate over the input. Lenient mode only demands the flag when the
/// condition holds; strict mode also rejects spurious requests.
class MakeSafeFlagOracle final : public Oracle {
 public:
  MakeSafeFlagOracle(std::string id, NamedPredicate required, std::size_t column, bool strict)
      : id_(std::move(id)), required_(std::move(required)), column_(column), strict_(strict) {}

  const std::string& id() const override { return id_; }

  Verdict judge(const InputPoint& input, const Output& output) const override {
    if (column_ >= output.size()) {
      throw ValidationError("output has no column " + std::to_string(column_));
    }
    const std::string& flag = output[column_];
    if (flag != "0" && flag != "1") throw ValidationError("make-safe column is not a flag: '" + flag + "'");
    const bool requested = flag == "1";
    if (required_.test(input)) {
      return requested ? Verdict::ok() : Verdict::fail("make safe required (" + required_.id + ") but not requested");
    }
    if (strict_ && requested) return Verdict::fail("make safe requested but not required (" + required_.id + ")");
    return Verdict::ok();
  }

 private:
  std::string id_;
  NamedPredicate required_;
  std::size_t column_;
  bool strict_;
};

/// Accepts everything; pairs with builtin:null for throughput measurement.
class AcceptAllOracle final : public Oracle {
 public:
  const std::string& id() const override { return id_; }
  Verdict judge(const InputPoint&, const Output&) const override { return Verdict::ok(); }

 private:
  std::string id_ = "accept";
};

/// Resolves an oracle spec:
///
///   expected:monitor_reference     full-output comparison with the monitor model
///   prepost:monitor_contract       make_safe == required, cause consistent with inputs
///   make_safe:<predicate>[@<col>]  flag must be 1 whenever the predicate holds
///   make_safe_strict:<predicate>[@<col>]  ...and 0 whenever it does not
///   accept                         always passes
inline std::unique_ptr<Oracle> make_oracle(std::string_view spec, const InputDomain& domain) {
  const std::string id(spec);
  if (spec == "expected:monitor_reference") {
    monitor::check_domain_shape(domain);
    return std::make_unique<ExpectedFunctionOracle>(
        id, [](const InputPoint& p) { return monitor::expected_outputs(monitor::read(p.values)); });
  }
  if (spec == "prepost:monitor_contract") {
    monitor::check_domain_shape(domain);
    return std::make_unique<PrePostOracle>(
        id, [](const InputPoint&) { return true; },
        [](const InputPoint& p, const Output& out) -> std::string {
          if (out.size() != 2) return "expected 2 output columns, got " + std::to_string(out.size());
          const auto in = monitor::read(p.values);
          const bool required = monitor::make_safe_required(in);
          if (out[0] != (required ? "1" : "0")) return required ? "make_safe == 1" : "make_safe == 0";
          if (out[1] != std::to_string(monitor::expected_cause(in))) return "cause matches tripped conditions";
          return {};
        });
  }
  for (const std::string_view prefix : {std::string_view("make_safe:"), std::string_view("make_safe_strict:")}) {
    if (spec.rfind(prefix, 0) != 0) continue;
    std::string_view rest = spec.substr(prefix.size());
    std::size_t column = 0;
    const auto at = rest.rfind('@');
    if (at != std::string_view::npos) {
      auto c = text::parse_int<std::size_t>(rest.substr(at + 1));
      if (!c) throw ValidationError("malformed output column in oracle '" + id + "'");
      column = *c;
      rest = rest.substr(0, at);
    }
    return std::make_unique<MakeSafeFlagOracle>(id, make_predicate(rest, domain), column,
                                                prefix == "make_safe_strict:");
  }
  if (spec == "accept") return std::make_unique<AcceptAllOracle>();
  throw ValidationError("unknown oracle '" + id + "'");
}

}  // namespace reliquant
