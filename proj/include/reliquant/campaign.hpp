#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "reliquant/domain.hpp"
#include "reliquant/error.hpp"
#include "reliquant/fault_tree.hpp"
#include "reliquant/op_profile.hpp"
#include "reliquant/oracle.hpp"
#include "reliquant/philox.hpp"
#include "reliquant/predicate.hpp"
#include "reliquant/rel_stats.hpp"
#include "reliquant/subject.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

enum class Mode { Exhaustive, PartialExhaustive, Statistical };

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Exhaustive: return "exhaustive";
    case Mode::PartialExhaustive: return "partial";
    case Mode::Statistical: return "statistical";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "exhaustive") return Mode::Exhaustive;
  if (s == "partial" || s == "partial_exhaustive" || s == "partial-exhaustive") return Mode::PartialExhaustive;
  if (s == "statistical") return Mode::Statistical;
  return std::nullopt;
}

struct CampaignSpec {
  Mode mode = Mode::Exhaustive;
  std::size_t workers = 1;
  std::size_t failure_cap = 1000;
  double confidence = 0.99;
  std::uint64_t n = 0;        // statistical
  std::string profile;        // statistical
  std::uint64_t seed = 0;     // statistical
  std::string predicate;      // partial-exhaustive

  void validate() const {
    if (workers == 0) throw ValidationError("workers must be at least 1");
    if (failure_cap == 0) throw ValidationError("failure_cap must be at least 1");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie strictly inside (0,1)");
    if (mode == Mode::Statistical) {
      if (n == 0) throw ValidationError("statistical mode needs n >= 1");
      if (profile.empty()) throw ValidationError("statistical mode needs a profile");
    }
    if (mode == Mode::PartialExhaustive && predicate.empty()) {
      throw ValidationError("partial-exhaustive mode needs a predicate");
    }
  }
};

/// Parses `key=value` lines: mode, workers, confidence, n, seed, profile,
/// predicate, failure_cap. `workers` keeps `fallback_workers` when absent.
inline CampaignSpec parse_campaign_spec(std::string_view document, std::size_t fallback_workers = 1) {
  CampaignSpec spec;
  spec.workers = fallback_workers;
  bool have_mode = false;
  std::size_t number = 0;
  for (const auto& raw : text::split(document, '\n')) {
    ++number;
    const auto hash = raw.find('#');
    const auto line = text::trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", number, 1);
    const auto key = text::trim(std::string_view(line).substr(0, eq));
    const auto value = text::trim(std::string_view(line).substr(eq + 1));
    const auto column = raw.find(value.empty() ? "=" : value) + 1;
    auto need_uint = [&](auto& slot) {
      auto v = text::parse_int<std::remove_reference_t<decltype(slot)>>(value);
      if (!v) throw ParseError("malformed integer for '" + key + "'", number, column);
      slot = *v;
    };
    if (key == "mode") {
      auto m = parse_mode(value);
      if (!m) throw ParseError("unknown mode '" + value + "'", number, column);
      spec.mode = *m;
      have_mode = true;
    } else if (key == "workers") {
      need_uint(spec.workers);
    } else if (key == "failure_cap") {
      need_uint(spec.failure_cap);
    } else if (key == "n") {
      need_uint(spec.n);
    } else if (key == "seed") {
      need_uint(spec.seed);
    } else if (key == "confidence") {
      auto c = parse_real(value);
      if (!c) throw ParseError("malformed confidence", number, column);
      spec.confidence = *c;
    } else if (key == "profile") {
      spec.profile = value;
    } else if (key == "predicate") {
      spec.predicate = value;
    } else {
      throw ParseError("unknown key '" + key + "'", number, 1);
    }
  }
  if (!have_mode) throw ValidationError("campaign spec has no mode");
  spec.validate();
  return spec;
}

enum class FailureKind { Mismatch, SubjectError, OracleError };

inline std::string_view to_string(FailureKind k) {
  switch (k) {
    case FailureKind::Mismatch: return "mismatch";
    case FailureKind::SubjectError: return "subject_error";
    case FailureKind::OracleError: return "oracle_error";
  }
  return "?";
}

inline std::optional<FailureKind> parse_failure_kind(std::string_view s) {
  if (s == "mismatch") return FailureKind::Mismatch;
  if (s == "subject_error") return FailureKind::SubjectError;
  if (s == "oracle_error") return FailureKind::OracleError;
  return std::nullopt;
}

struct Failure {
  std::uint64_t index = 0;            // global domain index
  std::optional<std::uint64_t> draw;  // sample ordinal (statistical mode)
  FailureKind kind = FailureKind::Mismatch;
  InputPoint input;
  Output observed;
  std::string detail;

  bool operator==(const Failure&) const = default;
};

/// Exhaustive-verification certificate: every point of the stated scope passed.
struct Certificate {
  std::string scope;
  std::uint64_t verified = 0;

  bool operator==(const Certificate&) const = default;
};

struct CampaignMetadata {
  Mode mode = Mode::Exhaustive;
  std::string subject;
  std::string oracle;
  std::string domain_digest;
  std::string domain_cardinality;
  std::string predicate;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::string generator;
  double confidence = 0.99;
  std::size_t workers = 1;
  std::size_t failure_cap = 1000;

  bool operator==(const CampaignMetadata&) const = default;
};

struct CampaignResult {
  std::uint64_t executed = 0;
  std::uint64_t failure_count = 0;
  std::vector<Failure> failures;  // first failure_cap, ascending by index (draw for statistical)
  double elapsed_seconds = 0.0;
  double throughput = 0.0;             // cases per second
  double throughput_per_worker = 0.0;  // cases per second per worker
  std::optional<DemonstratedClaim> claim;
  std::optional<Certificate> certificate;
  CampaignMetadata metadata;

  /// Everything except timing, and except the worker count in metadata.
  bool same_outcome(const CampaignResult& o) const {
    auto a = metadata;
    auto b = o.metadata;
    a.workers = b.workers = 0;
    const bool claims_equal =
        claim.has_value() == o.claim.has_value() &&
        (!claim || (claim->bound == o.claim->bound && claim->confidence == o.claim->confidence));
    return executed == o.executed && failure_count == o.failure_count && failures == o.failures && claims_equal &&
           certificate == o.certificate && a == b;
  }
};

namespace detail {

struct WorkerReport {
  std::uint64_t executed = 0;
  std::uint64_t failure_count = 0;
  std::vector<Failure> failures;
  std::exception_ptr error;
};

class CaseRunner {
 public:
  CaseRunner(Subject& subject, const Oracle& oracle, std::size_t cap, WorkerReport& report)
      : subject_(subject), oracle_(oracle), cap_(cap), report_(report) {}

  void operator()(std::uint64_t index, std::optional<std::uint64_t> draw, const InputPoint& p) {
    ++report_.executed;
    Reply reply = subject_.run(p);
    if (reply.error) {
      record(index, draw, FailureKind::SubjectError, p, {}, std::move(reply.message));
      return;
    }
    Verdict v;
    try {
      v = oracle_.judge(p, reply.outputs);
    } catch (const std::exception& e) {
      record(index, draw, FailureKind::OracleError, p, std::move(reply.outputs), e.what());
      return;
    }
    if (!v.pass) record(index, draw, FailureKind::Mismatch, p, std::move(reply.outputs), std::move(v.detail));
  }

 private:
  void record(std::uint64_t index, std::optional<std::uint64_t> draw, FailureKind kind, const InputPoint& p,
              Output observed, std::string detail) {
    ++report_.failure_count;
    // Each worker visits its cases in ascending order, so its first `cap`
    // failures contain every failure that can survive the global cut.
    if (report_.failures.size() < cap_) {
      report_.failures.push_back({index, draw, kind, p, std::move(observed), std::move(detail)});
    }
  }

  Subject& subject_;
  const Oracle& oracle_;
  std::size_t cap_;
  WorkerReport& report_;
};

// Splits [0, total) into `parts` balanced contiguous 64-bit ranges.
inline std::vector<std::pair<std::uint64_t, std::uint64_t>> split_range(std::uint64_t total, std::size_t parts) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  const std::uint64_t base = total / parts;
  const std::uint64_t extra = total % parts;
  std::uint64_t start = 0;
  for (std::size_t i = 0; i < parts; ++i) {
    const std::uint64_t size = base + (i < extra ? 1 : 0);
    out.emplace_back(start, start + size);
    start += size;
  }
  return out;
}

template <typename Body>
std::vector<WorkerReport> run_workers(std::size_t workers, Body body) {
  std::vector<WorkerReport> reports(workers);
  std::atomic<bool> abort{false};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        body(w, reports[w], abort);
      } catch (...) {
        reports[w].error = std::current_exception();
        abort = true;
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& r : reports) {
    if (r.error) std::rethrow_exception(r.error);
  }
  return reports;
}

inline CampaignResult merge(std::vector<WorkerReport> reports, const CampaignSpec& spec) {
  CampaignResult result;
  for (auto& r : reports) {
    result.executed += r.executed;
    result.failure_count += r.failure_count;
    std::move(r.failures.begin(), r.failures.end(), std::back_inserter(result.failures));
  }
  std::sort(result.failures.begin(), result.failures.end(), [](const Failure& a, const Failure& b) {
    if (a.draw && b.draw) return *a.draw < *b.draw;
    return a.index < b.index;
  });
  if (result.failures.size() > spec.failure_cap) result.failures.resize(spec.failure_cap);
  return result;
}

inline CampaignMetadata metadata_for(const InputDomain& domain, const SubjectSource& subject, const Oracle& oracle,
                                     const CampaignSpec& spec) {
  CampaignMetadata m;
  m.mode = spec.mode;
  m.subject = subject.id;
  m.oracle = oracle.id();
  m.domain_digest = domain.digest();
  m.domain_cardinality = domain.cardinality().str();
  m.confidence = spec.confidence;
  m.workers = spec.workers;
  m.failure_cap = spec.failure_cap;
  return m;
}

inline void stamp_timing(CampaignResult& r, std::chrono::steady_clock::time_point start) {
  r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (r.elapsed_seconds > 0.0) {
    r.throughput = static_cast<double>(r.executed) / r.elapsed_seconds;
    r.throughput_per_worker = r.throughput / static_cast<double>(r.metadata.workers);
  }
}

// Shared body of exhaustive and partial-exhaustive runs.
inline CampaignResult run_enumerated(const InputDomain& domain, const NamedPredicate* predicate,
                                     const SubjectSource& subject, const Oracle& oracle, const CampaignSpec& spec) {
  spec.validate();
  const std::uint64_t total = domain.require_u64_cardinality();
  const auto start = std::chrono::steady_clock::now();
  const auto ranges = split_range(total, spec.workers);
  auto reports = run_workers(spec.workers, [&](std::size_t w, WorkerReport& report, std::atomic<bool>& abort) {
    const auto [first, last] = ranges[w];
    if (first == last) return;
    auto instance = subject.make();
    CaseRunner run(*instance, oracle, spec.failure_cap, report);
    std::uint64_t visited = 0;
    if (predicate) {
      FilteredEnumeration points(domain, predicate->test, first, last);
      while (auto hit = points.next()) {
        run(hit->index, std::nullopt, hit->point);
        if ((++visited & 0xfff) == 0 && abort) return;
      }
    } else {
      InputPoint p = domain.decode(first);
      const auto& fields = domain.fields();
      for (std::uint64_t i = first; i < last; ++i) {
        run(i, std::nullopt, p);
        if ((++visited & 0xfff) == 0 && abort) return;
        for (std::size_t k = fields.size(); k-- > 0;) {
          if (p.values[k] < fields[k].hi) {
            ++p.values[k];
            break;
          }
          p.values[k] = fields[k].lo;
        }
      }
      if (visited != last - first) throw Error("worker range accounting mismatch");
    }
  });
  CampaignResult result = merge(std::move(reports), spec);
  if (!predicate && result.executed != total) throw Error("exhaustive run did not execute every index exactly once");
  result.metadata = metadata_for(domain, subject, oracle, spec);
  if (predicate) result.metadata.predicate = predicate->id;
  if (result.failure_count == 0 && result.executed > 0) {
    if (predicate) {
      result.certificate = Certificate{"partial-exhaustive: every point of domain " + result.metadata.domain_digest +
                                           " satisfying '" + predicate->id + "' (" +
                                           std::to_string(result.executed) + " of " +
                                           result.metadata.domain_cardinality + " points)",
                                       result.executed};
    } else {
      result.certificate = Certificate{"exhaustive: every point of domain " + result.metadata.domain_digest + " (" +
                                           result.metadata.domain_cardinality + " points)",
                                       result.executed};
    }
  }
  stamp_timing(result, start);
  return result;
}

}  // namespace detail

/// Runs every point of the domain once, split into `spec.workers`
/// contiguous index ranges. A failure-free run yields a certificate.
inline CampaignResult run_exhaustive(const InputDomain& domain, const SubjectSource& subject, const Oracle& oracle,
                                     const CampaignSpec& spec) {
  if (spec.mode != Mode::Exhaustive) throw ValidationError("run_exhaustive needs mode=exhaustive");
  return detail::run_enumerated(domain, nullptr, subject, oracle, spec);
}

/// Runs exactly the points satisfying `predicate`. An empty selection
/// executes nothing and earns no certificate.
inline CampaignResult run_partial_exhaustive(const InputDomain& domain, const NamedPredicate& predicate,
                                             const SubjectSource& subject, const Oracle& oracle,
                                             const CampaignSpec& spec) {
  if (spec.mode != Mode::PartialExhaustive) throw ValidationError("run_partial_exhaustive needs mode=partial");
  return detail::run_enumerated(domain, &predicate, subject, oracle, spec);
}

/// Runs `spec.n` points drawn with replacement from the profile. Draw d is
/// a pure function of (seed, d), so each worker computes its own block of
/// draws and the outcome does not depend on the worker count. A
/// failure-free run yields a per-demand claim at `spec.confidence`.
inline CampaignResult run_statistical(const InputDomain& domain, const OperationalProfile& profile,
                                      const SubjectSource& subject, const Oracle& oracle, const CampaignSpec& spec) {
  if (spec.mode != Mode::Statistical) throw ValidationError("run_statistical needs mode=statistical");
  spec.validate();
  domain.require_u64_cardinality();
  const CompiledProfile compiled(profile, domain);
  const auto start = std::chrono::steady_clock::now();
  const auto blocks = detail::split_range(spec.n, spec.workers);
  auto reports = detail::run_workers(
      spec.workers, [&](std::size_t w, detail::WorkerReport& report, std::atomic<bool>& abort) {
        const auto [first, last] = blocks[w];
        if (first == last) return;
        auto instance = subject.make();
        detail::CaseRunner run(*instance, oracle, spec.failure_cap, report);
        InputPoint p;
        p.values.resize(domain.arity());
        for (std::uint64_t d = first; d < last; ++d) {
          const auto index = compiled.draw(spec.seed, d).index;
          domain.decode(index, p.values);
          run(index, d, p);
          if (((d - first) & 0xfff) == 0xfff && abort) return;
        }
      });
  CampaignResult result = detail::merge(std::move(reports), spec);
  result.metadata = detail::metadata_for(domain, subject, oracle, spec);
  result.metadata.profile = profile.name;
  result.metadata.seed = spec.seed;
  result.metadata.generator = Philox4x32::name;
  result.claim = claim_from(DemandEvidence{result.executed, result.failure_count}, spec.confidence);
  detail::stamp_timing(result, start);
  return result;
}

/// Basic-event fragment carrying a campaign's evidence into a fault tree.
/// Statistical claims give the demonstrated pfd (restated at `confidence`
/// when supplied); certificates give probability 0 with a caveat label.
inline BasicEvent derive_fault_tree_input(const CampaignResult& result, std::optional<double> confidence = {},
                                          std::string event_id = "sw_claim") {
  if (!text::is_identifier(event_id)) throw ValidationError("invalid event id '" + event_id + "'");
  if (result.claim) {
    const double c = confidence.value_or(result.claim->confidence);
    const double bound = confidence ? demonstrated_pfd(result.executed, c) : result.claim->bound;
    std::string label = "statistical, C=" + to_shortest_string(c) + ", n=" + std::to_string(result.executed);
    if (result.metadata.seed) label += ", seed=" + std::to_string(*result.metadata.seed);
    if (!result.metadata.generator.empty()) label += ", generator=" + result.metadata.generator;
    if (!result.metadata.profile.empty()) label += ", profile=" + result.metadata.profile;
    return {std::move(event_id), bound, std::move(label)};
  }
  if (result.certificate) {
    return {std::move(event_id), 0.0,
            "exhaustive over stated domain only (model assumption): " + result.certificate->scope};
  }
  throw NoClaimError("no claim available: campaign has " + std::to_string(result.failure_count) +
                     " failure(s) or no executed cases");
}

/// `event <id> p=<probability> "<label>"`, ready to paste into a tree document.
inline std::string format_event_line(const BasicEvent& e) {
  std::string line = "event " + e.id + " p=" + to_shortest_string(e.probability);
  if (!e.label.empty()) line += " \"" + e.label + "\"";
  return line;
}

}  // namespace reliquant
