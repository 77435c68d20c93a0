#pragma once

// Campaign report persistence: one `key=value` per line followed by one
// tab-separated `failure:` record per retained failure:
//
//   failure:<TAB>index<TAB>draw|-<TAB>kind<TAB>input<TAB>observed<TAB>detail
//
// input is comma-joined; observed is `<count>:` followed by the comma-joined
// cells. All free-text cells are
// backslash-escaped (\\ \t \n \r, and \c for a comma).

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "reliquant/campaign.hpp"
#include "reliquant/error.hpp"
#include "reliquant/numeric.hpp"
#include "reliquant/text.hpp"

namespace reliquant {

inline constexpr std::string_view kReportHeader = "reliquant-report=1";

namespace detail {

inline std::string join_cells(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

}  // namespace detail

inline std::string write_report(const CampaignResult& r) {
  std::ostringstream out;
  const auto& m = r.metadata;
  out << kReportHeader << '\n';
  out << "mode=" << to_string(m.mode) << '\n';
  out << "subject=" << text::escape(m.subject) << '\n';
  out << "oracle=" << text::escape(m.oracle) << '\n';
  out << "domain_digest=" << m.domain_digest << '\n';
  out << "domain_cardinality=" << m.domain_cardinality << '\n';
  out << "predicate=" << text::escape(m.predicate) << '\n';
  out << "profile=" << text::escape(m.profile) << '\n';
  out << "seed=" << (m.seed ? std::to_string(*m.seed) : std::string()) << '\n';
  out << "generator=" << m.generator << '\n';
  out << "confidence=" << to_shortest_string(m.confidence) << '\n';
  out << "workers=" << m.workers << '\n';
  out << "failure_cap=" << m.failure_cap << '\n';
  out << "executed=" << r.executed << '\n';
  out << "failure_count=" << r.failure_count << '\n';
  out << "elapsed_s=" << to_shortest_string(r.elapsed_seconds) << '\n';
  out << "throughput=" << to_shortest_string(r.throughput) << '\n';
  out << "throughput_per_worker=" << to_shortest_string(r.throughput_per_worker) << '\n';
  if (r.claim) {
    out << "claim=statistical\n";
    out << "claim_bound=" << to_shortest_string(r.claim->bound) << '\n';
    out << "claim_confidence=" << to_shortest_string(r.claim->confidence) << '\n';
  } else if (r.certificate) {
    out << "claim=certificate\n";
    out << "certificate_scope=" << text::escape(r.certificate->scope) << '\n';
    out << "certificate_verified=" << r.certificate->verified << '\n';
  } else {
    out << "claim=none\n";
  }
  for (const auto& f : r.failures) {
    std::vector<std::string> input;
    for (const auto v : f.input.values) input.push_back(std::to_string(v));
    std::vector<std::string> observed;
    for (const auto& o : f.observed) observed.push_back(text::escape(o));
    out << "failure:\t" << f.index << '\t' << (f.draw ? std::to_string(*f.draw) : "-") << '\t' << to_string(f.kind)
        << '\t' << detail::join_cells(input) << '\t' << observed.size() << ':' << detail::join_cells(observed) << '\t' << text::escape(f.detail)
        << '\n';
  }
  return out.str();
}

/// Inverse of write_report(). Throws ValidationError on anything malformed.
inline CampaignResult read_report(std::string_view document) {
  const auto lines = text::split(document, '\n');
  if (lines.empty() || text::trim(lines[0]) != kReportHeader) {
    throw ValidationError("not a reliquant report (missing header)");
  }
  std::map<std::string, std::string> kv;
  CampaignResult r;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto where = " (report line " + std::to_string(i + 1) + ")";
    if (line.rfind("failure:\t", 0) == 0) {
      const auto cells = text::split(line.substr(9), '\t');
      if (cells.size() != 6) throw ValidationError("malformed failure record" + where);
      Failure f;
      auto index = text::parse_int<std::uint64_t>(cells[0]);
      if (!index) throw ValidationError("malformed failure index" + where);
      f.index = *index;
      if (cells[1] != "-") {
        auto draw = text::parse_int<std::uint64_t>(cells[1]);
        if (!draw) throw ValidationError("malformed failure draw" + where);
        f.draw = *draw;
      }
      auto kind = parse_failure_kind(cells[2]);
      if (!kind) throw ValidationError("unknown failure kind '" + cells[2] + "'" + where);
      f.kind = *kind;
      if (!cells[3].empty()) {
        for (const auto& v : text::split(cells[3], ',')) {
          auto value = text::parse_int<std::int64_t>(v);
          if (!value) throw ValidationError("malformed failure input" + where);
          f.input.values.push_back(*value);
        }
      }
      const auto colon = cells[4].find(':');
      const auto count = colon == std::string::npos ? std::nullopt
                                                    : text::parse_int<std::size_t>(cells[4].substr(0, colon));
      if (!count) throw ValidationError("malformed observed cell" + where);
      if (*count > 0) {
        for (const auto& o : text::split(std::string_view(cells[4]).substr(colon + 1), ',')) {
          auto cell = text::unescape(o);
          if (!cell) throw ValidationError("malformed escape" + where);
          f.observed.push_back(*cell);
        }
      }
      if (f.observed.size() != *count) throw ValidationError("observed cell count mismatch" + where);
      auto detail_text = text::unescape(cells[5]);
      if (!detail_text) throw ValidationError("malformed escape" + where);
      f.detail = *detail_text;
      r.failures.push_back(std::move(f));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError("expected key=value" + where);
    auto value = text::unescape(line.substr(eq + 1));
    if (!value) throw ValidationError("malformed escape" + where);
    kv[std::string(line.substr(0, eq))] = *value;
  }

  auto get = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError("report is missing '" + key + "'");
    return it->second;
  };
  auto get_uint = [&](const std::string& key) {
    auto v = text::parse_int<std::uint64_t>(get(key));
    if (!v) throw ValidationError("report field '" + key + "' is not an unsigned integer");
    return *v;
  };
  auto get_real = [&](const std::string& key) {
    auto v = parse_real(get(key));
    if (!v) throw ValidationError("report field '" + key + "' is not a number");
    return *v;
  };

  auto& m = r.metadata;
  auto mode = parse_mode(get("mode"));
  if (!mode) throw ValidationError("report has unknown mode '" + get("mode") + "'");
  m.mode = *mode;
  m.subject = get("subject");
  m.oracle = get("oracle");
  m.domain_digest = get("domain_digest");
  m.domain_cardinality = get("domain_cardinality");
  m.predicate = get("predicate");
  m.profile = get("profile");
  if (!get("seed").empty()) m.seed = get_uint("seed");
  m.generator = get("generator");
  m.confidence = get_real("confidence");
  m.workers = get_uint("workers");
  m.failure_cap = get_uint("failure_cap");
  r.executed = get_uint("executed");
  r.failure_count = get_uint("failure_count");
  r.elapsed_seconds = get_real("elapsed_s");
  r.throughput = get_real("throughput");
  r.throughput_per_worker = get_real("throughput_per_worker");
  const auto& claim = get("claim");
  if (claim == "statistical") {
    DemonstratedClaim c;
    c.bound = get_real("claim_bound");
    c.confidence = get_real("claim_confidence");
    c.evidence = DemandEvidence{r.executed, r.failure_count};
    c.basis = Basis::PerDemand;
    r.claim = c;
  } else if (claim == "certificate") {
    r.certificate = Certificate{get("certificate_scope"), get_uint("certificate_verified")};
  } else if (claim != "none") {
    throw ValidationError("report has unknown claim kind '" + claim + "'");
  }
  if (r.failures.size() > r.failure_count) throw ValidationError("report lists more failures than failure_count");
  if ((r.claim || r.certificate) && r.failure_count != 0) throw ValidationError("report claims despite failures");
  return r;
}

}  // namespace reliquant
