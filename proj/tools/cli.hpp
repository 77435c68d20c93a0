#pragma once

// reliquant command-line front end. Kept in a header so the test suite can
// drive commands in-process.
//
// Exit status: 0 success / claim emitted, 1 campaign completed with
// failures, 2 usage or validation error, 3 runtime error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "reliquant/reliquant.hpp"

namespace reliquant::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kFailures = 1,
  kUsage = 2,
  kRuntime = 3,
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << content)) throw Error("cannot write '" + path + "'");
}

inline std::string fmt_real(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

/// RELIQUANT_WORKERS, when set to a positive integer.
inline std::optional<std::size_t> env_workers() {
  const char* v = std::getenv("RELIQUANT_WORKERS");
  if (!v) return std::nullopt;
  auto n = text::parse_int<std::size_t>(v);
  if (!n || *n == 0) throw ValidationError("RELIQUANT_WORKERS must be a positive integer");
  return n;
}

inline void print_summary(const CampaignResult& r, std::ostream& out, std::size_t limit) {
  const auto& m = r.metadata;
  out << "mode:        " << to_string(m.mode) << '\n';
  out << "subject:     " << m.subject << '\n';
  out << "oracle:      " << m.oracle << '\n';
  out << "domain:      " << m.domain_digest << " (" << m.domain_cardinality << " points)\n";
  if (!m.predicate.empty()) out << "predicate:   " << m.predicate << '\n';
  if (!m.profile.empty()) out << "profile:     " << m.profile << '\n';
  if (m.seed) out << "seed:        " << *m.seed << " (" << m.generator << ")\n";
  out << "workers:     " << m.workers << '\n';
  out << "executed:    " << r.executed << '\n';
  out << "failures:    " << r.failure_count << '\n';
  out << "elapsed:     " << fmt_real(r.elapsed_seconds, 4) << " s\n";
  out << "throughput:  " << fmt_real(r.throughput, 4) << " cases/s (" << fmt_real(r.throughput_per_worker, 4)
      << " cases/s/worker)\n";
  if (r.claim) {
    out << "claim:       pfd <= " << to_shortest_string(r.claim->bound) << " ("
        << format_significant(r.claim->bound) << ") at confidence " << to_shortest_string(r.claim->confidence)
        << '\n';
  } else if (r.certificate) {
    out << "certificate: " << r.certificate->scope << '\n';
  } else if (r.failure_count == 0) {
    out << "claim:       none (no cases executed; certificate refused)\n";
  } else {
    out << "claim:       none (zero-failure evidence required)\n";
  }
  if (!r.failures.empty()) {
    const auto shown = std::min(limit, r.failures.size());
    out << "first " << shown << " of " << r.failure_count << " failure(s):\n";
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& f = r.failures[i];
      out << "  index " << f.index;
      if (f.draw) out << " (draw " << *f.draw << ")";
      out << "  " << to_string(f.kind) << "  input=";
      for (std::size_t k = 0; k < f.input.values.size(); ++k) out << (k ? "," : "") << f.input.values[k];
      out << "  observed=";
      for (std::size_t k = 0; k < f.observed.size(); ++k) out << (k ? "," : "") << f.observed[k];
      if (!f.detail.empty()) out << "  " << f.detail;
      out << '\n';
    }
  }
}

inline int cmd_plan(std::optional<double> pfd, std::optional<double> rate, double confidence, bool per_hour,
                    std::optional<std::uint64_t> tests, std::optional<double> hours, std::ostream& out) {
  if (per_hour || rate || hours) {
    if (pfd || tests) throw ValidationError("--per-hour/--rate/--hours cannot be combined with --pfd/--tests");
    if (rate) {
      const double t = required_test_hours(*rate, confidence);
      out << "basis: per-hour (constant failure rate)\n";
      out << "rate: " << to_shortest_string(*rate) << " per hour\n";
      out << "confidence: " << to_shortest_string(confidence) << '\n';
      out << "required failure-free hours: " << to_shortest_string(t) << " (" << format_magnitude_words(t)
          << " hours, " << format_significant(t) << ")\n";
      return kSuccess;
    }
    if (hours) {
      const double lambda = demonstrated_failure_rate(*hours, confidence);
      out << "basis: per-hour (constant failure rate)\n";
      out << "demonstrated rate: " << to_shortest_string(lambda) << " per hour (" << format_significant(lambda)
          << ") after " << to_shortest_string(*hours) << " failure-free hours at confidence "
          << to_shortest_string(confidence) << '\n';
      return kSuccess;
    }
    throw ValidationError("per-hour planning needs --rate or --hours");
  }
  if (pfd && tests) {
    const double c = achieved_confidence(*pfd, *tests);
    out << "basis: per-demand\n";
    out << "achieved confidence: " << to_shortest_string(c) << " that pfd <= " << to_shortest_string(*pfd)
        << " after " << *tests << " failure-free tests\n";
    return kSuccess;
  }
  if (pfd) {
    const auto n = required_test_count(*pfd, confidence);
    out << "basis: per-demand\n";
    out << "pfd: " << to_shortest_string(*pfd) << '\n';
    out << "confidence: " << to_shortest_string(confidence) << '\n';
    out << "required failure-free tests: " << n << " (" << format_significant(static_cast<double>(n)) << ")\n";
    return kSuccess;
  }
  if (tests) {
    const double p = demonstrated_pfd(*tests, confidence);
    out << "basis: per-demand\n";
    out << "demonstrated pfd: " << to_shortest_string(p) << " (" << format_significant(p) << ") after " << *tests
        << " failure-free tests at confidence " << to_shortest_string(confidence) << '\n';
    return kSuccess;
  }
  throw ValidationError("plan needs --pfd, --tests, --rate or --hours");
}

inline int cmd_tree(const std::string& action, const std::string& path, const std::string& method,
                    std::ostream& out) {
  const FaultTree tree = parse_fault_tree(read_file(path));
  if (action == "fmt") {
    out << serialize_fault_tree(tree);
    return kSuccess;
  }
  if (action == "cutsets") {
    for (const auto& cs : minimal_cut_sets(tree)) {
      out << '{';
      for (std::size_t i = 0; i < cs.events.size(); ++i) out << (i ? "," : "") << cs.events[i];
      out << "}\n";
    }
    return kSuccess;
  }
  if (action == "eval") {
    const CutSetModel model(tree);
    const auto p = tree.probabilities();
    if (method == "exact" || method == "both") {
      try {
        const auto exact = static_cast<double>(model.exact(p));
        out << "exact:      " << to_shortest_string(exact) << " (" << format_significant(exact) << ")\n";
      } catch (const TermLimitError& e) {
        if (method == "exact") throw;
        out << "exact:      n/a (" << e.what() << ")\n";
      }
    }
    if (method == "rare" || method == "both") {
      const auto rare = static_cast<double>(model.rare_event(p));
      out << "rare-event: " << to_shortest_string(rare) << " (" << format_significant(rare) << ")\n";
    }
    return kSuccess;
  }
  if (action == "rank") {
    const auto report = improvement_ranking(tree);
    out << std::left << std::setw(6) << "rank" << std::setw(16) << "event" << std::setw(18) << "fussell_vesely"
        << "birnbaum\n";
    std::size_t rank = 0;
    for (const auto& id : report.ranking) {
      const auto& e = *std::find_if(report.entries.begin(), report.entries.end(),
                                    [&](const ImportanceEntry& x) { return x.event == id; });
      out << std::left << std::setw(6) << ++rank << std::setw(16) << id << std::setw(18)
          << fmt_real(e.fussell_vesely) << fmt_real(e.birnbaum) << '\n';
    }
    return kSuccess;
  }
  throw ValidationError("unknown tree action '" + action + "'");
}

struct RunArgs {
  std::string domain;
  std::string spec;
  std::string subject;
  std::string oracle;
  std::string profiles;
  std::string report;
  std::string fragment;
  std::string event_id = "sw_claim";
  std::optional<std::size_t> workers;
};

inline int cmd_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const InputDomain domain = parse_domain(read_file(a.domain));
  CampaignSpec spec = parse_campaign_spec(read_file(a.spec), env_workers().value_or(1));
  if (a.workers) spec.workers = *a.workers;
  spec.validate();
  const auto subject = make_subject_source(a.subject, domain);
  const auto oracle = make_oracle(a.oracle, domain);

  CampaignResult result;
  switch (spec.mode) {
    case Mode::Exhaustive:
      result = run_exhaustive(domain, subject, *oracle, spec);
      break;
    case Mode::PartialExhaustive:
      result = run_partial_exhaustive(domain, make_predicate(spec.predicate, domain), subject, *oracle, spec);
      break;
    case Mode::Statistical: {
      if (a.profiles.empty()) throw ValidationError("statistical mode needs --profiles");
      const auto profiles = parse_profiles(read_file(a.profiles));
      auto it = std::find_if(profiles.begin(), profiles.end(),
                             [&](const OperationalProfile& p) { return p.name == spec.profile; });
      if (it == profiles.end()) throw ValidationError("profile '" + spec.profile + "' not found in " + a.profiles);
      validate_profile(*it, domain);
      result = run_statistical(domain, *it, subject, *oracle, spec);
      break;
    }
  }

  if (!a.report.empty()) write_file(a.report, write_report(result));
  print_summary(result, out, 10);
  if (a.subject == "builtin:null" && result.executed >= 100000 && result.throughput_per_worker < 1e5) {
    err << "warning: harness throughput " << fmt_real(result.throughput_per_worker, 4)
        << " cases/s/worker is below 1e5 with the null subject\n";
  }
  if (result.claim || result.certificate) {
    const auto line = format_event_line(derive_fault_tree_input(result, std::nullopt, a.event_id));
    out << "fault-tree input: " << line << '\n';
    if (!a.fragment.empty()) write_file(a.fragment, line + "\n");
  }
  return result.failure_count == 0 ? kSuccess : kFailures;
}

inline int cmd_report(const std::string& path, std::size_t limit, std::ostream& out) {
  const auto result = read_report(read_file(path));
  print_summary(result, out, limit);
  return result.failure_count == 0 ? kSuccess : kFailures;
}

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"reliquant: software reliability quantification toolkit", "reliquant"};
  app.require_subcommand(1);

  auto* plan = app.add_subcommand("plan", "Failure-free test counts, durations and demonstrated bounds");
  std::optional<double> pfd;
  std::optional<double> rate;
  std::optional<std::uint64_t> tests;
  std::optional<double> hours;
  double confidence = 0.0;
  bool per_hour = false;
  plan->add_option("--pfd", pfd, "Target probability of failure per demand, in (0,1)");
  plan->add_option("--rate", rate, "Target failure rate per hour (> 0)");
  plan->add_option("--tests", tests, "Failure-free tests already executed");
  plan->add_option("--hours", hours, "Failure-free hours already accumulated");
  plan->add_option("--confidence", confidence, "Confidence level, in (0,1)")->required();
  plan->add_flag("--per-hour", per_hour, "Per-hour basis (constant failure rate)");

  auto* tree = app.add_subcommand("tree", "Evaluate and rank fault trees");
  std::string tree_action;
  std::string tree_path;
  std::string method = "both";
  tree->add_option("action", tree_action, "eval | rank | cutsets | fmt")
      ->required()
      ->check(CLI::IsMember({"eval", "rank", "cutsets", "fmt"}));
  tree->add_option("file", tree_path, "Fault-tree document")->required();
  tree->add_option("--method", method, "exact | rare | both (eval only)")
      ->check(CLI::IsMember({"exact", "rare", "both"}));

  auto* run = app.add_subcommand("run", "Execute a test campaign");
  RunArgs run_args;
  run->add_option("--domain", run_args.domain, "Domain document")->required();
  run->add_option("--spec", run_args.spec, "Campaign spec (key=value)")->required();
  run->add_option("--subject", run_args.subject, "builtin:<name> | exec:<command>")->required();
  run->add_option("--oracle", run_args.oracle, "Oracle spec")->required();
  run->add_option("--profiles", run_args.profiles, "Operational profile document (statistical mode)");
  run->add_option("--report", run_args.report, "Write the campaign report here");
  run->add_option("--fragment", run_args.fragment, "Write the fault-tree event fragment here");
  run->add_option("--event-id", run_args.event_id, "Event id used in the fragment");
  run->add_option("--workers", run_args.workers, "Worker count (overrides spec and RELIQUANT_WORKERS)");

  auto* report = app.add_subcommand("report", "Summarize a campaign report");
  std::string report_path;
  std::size_t limit = 10;
  report->add_option("file", report_path, "Report file")->required();
  report->add_option("--limit", limit, "Failures to list");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  if (!argv_rev.empty()) argv_rev.pop_back();  // program name
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*plan) return cmd_plan(pfd, rate, confidence, per_hour, tests, hours, out);
    if (*tree) return cmd_tree(tree_action, tree_path, method, out);
    if (*run) return cmd_run(run_args, out, err);
    if (*report) return cmd_report(report_path, limit, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kUsage;
}

}  // namespace reliquant::cli
