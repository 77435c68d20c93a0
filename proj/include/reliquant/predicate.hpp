#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/monitor.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

/// Input-space predicate with a stable id, used to select the subset of a
/// domain a partial-exhaustive campaign covers.
struct NamedPredicate {
  std::string id;
  std::function<bool(const InputPoint&)> test;
};

namespace detail {

struct Comparison {
  std::size_t field = 0;
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge } op = Op::Eq;
  std::int64_t value = 0;

  bool operator()(const InputPoint& p) const {
    const auto v = p.values[field];
    switch (op) {
      case Op::Eq: return v == value;
      case Op::Ne: return v != value;
      case Op::Lt: return v < value;
      case Op::Le: return v <= value;
      case Op::Gt: return v > value;
      case Op::Ge: return v >= value;
    }
    return false;
  }
};

inline Comparison parse_comparison(std::string_view clause, const InputDomain& domain) {
  static constexpr std::pair<std::string_view, Comparison::Op> ops[] = {
      {"==", Comparison::Op::Eq}, {"!=", Comparison::Op::Ne}, {"<=", Comparison::Op::Le},
      {">=", Comparison::Op::Ge}, {"<", Comparison::Op::Lt},  {">", Comparison::Op::Gt}};
  for (const auto& [token, op] : ops) {
    const auto at = clause.find(token);
    if (at == std::string_view::npos) continue;
    const auto name = text::trim(clause.substr(0, at));
    const auto rhs = text::trim(clause.substr(at + token.size()));
    const auto k = domain.field_index(name);
    if (!k) throw ValidationError("predicate refers to unknown field '" + name + "'");
    const auto& f = domain.fields()[*k];
    std::optional<std::int64_t> value;
    if (f.kind == FieldKind::Enum) {
      value = f.parse_value(rhs);
    } else {
      value = text::parse_int<std::int64_t>(rhs);
    }
    if (!value) throw ValidationError("predicate value '" + rhs + "' is not valid for field '" + name + "'");
    return {*k, op, *value};
  }
  throw ValidationError("malformed predicate clause '" + std::string(clause) + "'");
}

}  // namespace detail

/// Resolves a predicate id against a domain. Recognized ids:
///
///   always, never
///   make_safe_required          the reference monitor's trip condition
///   where:<clause>[,<clause>]   conjunction of `<field><op><value>`,
///                               op one of == != < <= > >=
inline NamedPredicate make_predicate(std::string_view id, const InputDomain& domain) {
  const std::string name(id);
  if (id == "always") return {name, [](const InputPoint&) { return true; }};
  if (id == "never") return {name, [](const InputPoint&) { return false; }};
  if (id == "make_safe_required") {
    monitor::check_domain_shape(domain);
    return {name, [](const InputPoint& p) { return monitor::make_safe_required(monitor::read(p.values)); }};
  }
  if (id.rfind("where:", 0) == 0) {
    std::vector<detail::Comparison> clauses;
    for (const auto& clause : text::split(id.substr(6), ',')) {
      clauses.push_back(detail::parse_comparison(clause, domain));
    }
    return {name, [clauses = std::move(clauses)](const InputPoint& p) {
              for (const auto& c : clauses) {
                if (!c(p)) return false;
              }
              return true;
            }};
  }
  throw ValidationError("unknown predicate '" + name + "'");
}

}  // namespace reliquant
