#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>

#include "cli.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using testing_support::data_path;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "reliquant");
  std::ostringstream out;
  std::ostringstream err;
  const int code = reliquant::cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("reliquant_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    ::unsetenv("RELIQUANT_WORKERS");
  }
  void TearDown() override {
    fs::remove_all(dir_);
    ::unsetenv("RELIQUANT_WORKERS");
  }
  std::string file(const std::string& name, const std::string& content) {
    const auto p = (dir_ / name).string();
    reliquant::cli::write_file(p, content);
    return p;
  }
  std::string path(const std::string& name) { return (dir_ / name).string(); }

  // 2^12 monitor domain; small enough for quick end-to-end runs.
  std::string small_domain() {
    return file("small.domain",
                "field temperature int 20 35\nfield pressure int 22 29\nfield level int 0 3\n"
                "field sensor_a_ok flag\nfield sensor_b_ok flag\nfield inhibit flag\n");
  }

  fs::path dir_;
};

}  // namespace

TEST(CliPlan, PerDemandHeadline) {
  const auto r = cli({"plan", "--pfd", "1e-6", "--confidence", "0.99"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("required failure-free tests: 4605168 (4.61e6)"), std::string::npos) << r.out;
}

TEST(CliPlan, PerHourHeadline) {
  const auto r = cli({"plan", "--per-hour", "--rate", "1e-6", "--confidence", "0.99"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4.61 million hours"), std::string::npos) << r.out;
}

TEST(CliPlan, InverseQuestions) {
  auto r = cli({"plan", "--tests", "1000000", "--confidence", "0.99"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("4.61e-6"), std::string::npos) << r.out;
  r = cli({"plan", "--pfd", "1e-6", "--tests", "4605168", "--confidence", "0.99"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("achieved confidence: 0.99000000116"), std::string::npos) << r.out;
  r = cli({"plan", "--hours", "1e9", "--confidence", "0.99"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("4.61e-9"), std::string::npos) << r.out;
}

TEST(CliPlan, UsageErrorsExitTwo) {
  EXPECT_EQ(cli({"plan", "--pfd", "1.5", "--confidence", "0.99"}).code, 2);
  EXPECT_EQ(cli({"plan", "--pfd", "1e-6", "--confidence", "1"}).code, 2);
  EXPECT_EQ(cli({"plan", "--pfd", "1e-6"}).code, 2);
  EXPECT_EQ(cli({"plan", "--confidence", "0.9"}).code, 2);
  EXPECT_EQ(cli({"plan", "--pfd", "x", "--confidence", "0.9"}).code, 2);
  EXPECT_EQ(cli({"plan", "--pfd", "1e-3", "--rate", "1e-3", "--confidence", "0.9"}).code, 2);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliFiles, TreeCommands) {
  const auto justified = data_path("backup_pair_justified.tree");
  auto r = cli({"tree", "eval", justified});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("exact:      0.000109999 (1.1e-4)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("rare-event: 0.00011"), std::string::npos) << r.out;
  r = cli({"tree", "rank", justified});
  EXPECT_EQ(r.code, 0);
  const auto a = r.out.find("\n1     A");
  const auto b = r.out.find("\n2     B");
  const auto c = r.out.find("\n3     C");
  EXPECT_TRUE(a != std::string::npos && b != std::string::npos && c != std::string::npos) << r.out;

  r = cli({"tree", "rank", data_path("backup_pair_optimistic.tree")});
  EXPECT_NE(r.out.find("\n1     C"), std::string::npos) << r.out;

  r = cli({"tree", "cutsets", justified});
  EXPECT_EQ(r.out, "{A,B}\n{C}\n");

  r = cli({"tree", "fmt", justified});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(reliquant::serialize_fault_tree(reliquant::parse_fault_tree(r.out)), r.out);

  r = cli({"tree", "eval", justified, "--method", "rare"});
  EXPECT_EQ(r.out.find("exact"), std::string::npos);
}

TEST_F(CliFiles, TreeErrors) {
  auto r = cli({"tree", "eval", file("empty.tree", "")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 1, column 1"), std::string::npos) << r.err;
  r = cli({"tree", "eval", file("bad.tree", "event A p=0.1\nevent B p=0.2\ngate g and A Q\ntop g\n")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 3, column 14"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"tree", "eval", path("missing.tree")}).code, 2);
  EXPECT_EQ(cli({"tree", "juggle", data_path("backup_pair_justified.tree")}).code, 2);

  std::string doc;
  std::string gate = "gate g or";
  for (int i = 0; i < 21; ++i) {
    doc += "event e" + std::to_string(i) + " p=0.001\n";
    gate += " e" + std::to_string(i);
  }
  const auto wide = file("wide.tree", doc + gate + "\ntop g\n");
  r = cli({"tree", "eval", wide});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("exact:      n/a"), std::string::npos);
  EXPECT_EQ(cli({"tree", "eval", wide, "--method", "exact"}).code, 3);
  EXPECT_EQ(cli({"tree", "rank", file("zero.tree", "event a p=0\nevent b p=0\ngate g or a b\ntop g\n")}).code, 3);
}

TEST_F(CliFiles, ExhaustiveRunWritesReportAndFragment) {
  const auto domain = small_domain();
  const auto spec = file("ex.spec", "mode=exhaustive\nworkers=2\n");
  const auto report = path("ex.report");
  const auto fragment = path("ex.fragment");
  auto r = cli({"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor", "--oracle",
                "expected:monitor_reference", "--report", report, "--fragment", fragment, "--event-id", "A"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("executed:    4096"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("certificate: exhaustive"), std::string::npos) << r.out;
  const auto frag = testing_support::slurp(fragment);
  EXPECT_EQ(frag.rfind("event A p=0 \"exhaustive over stated domain only", 0), 0u) << frag;
  const auto back = cli({"report", report});
  EXPECT_EQ(back.code, 0);
  EXPECT_NE(back.out.find("executed:    4096"), std::string::npos);
}

TEST_F(CliFiles, MutantRunExitsOneAndListsIndices) {
  const auto domain = small_domain();
  const auto spec = file("ex.spec", "mode=exhaustive\n");
  const auto report = path("mutant.report");
  auto r = cli({"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor_mutant", "--oracle",
                "expected:monitor_reference", "--report", report, "--workers", "3"});
  EXPECT_EQ(r.code, 1) << r.err;
  EXPECT_NE(r.out.find("first 10 of"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("  index "), std::string::npos);
  EXPECT_NE(r.out.find("workers:     3"), std::string::npos);
  EXPECT_EQ(r.out.find("fault-tree input"), std::string::npos);
  auto rep = cli({"report", report, "--limit", "2"});
  EXPECT_EQ(rep.code, 1);
  EXPECT_NE(rep.out.find("first 2 of"), std::string::npos) << rep.out;
}

TEST_F(CliFiles, StatisticalRun) {
  const auto domain = small_domain();
  const auto profiles = file("p.profiles", "profile flat\nstratum w=1\n");
  const auto spec = file("st.spec", "mode=statistical\nn=20000\nseed=3\nprofile=flat\n");
  const auto report_a = path("a.report");
  const auto report_b = path("b.report");
  auto r = cli({"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor", "--oracle",
                "prepost:monitor_contract", "--profiles", profiles, "--report", report_a, "--workers", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("claim:       pfd <= "), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("fault-tree input: event sw_claim p="), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("seed:        3 (philox4x32-10)"), std::string::npos) << r.out;
  r = cli({"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor", "--oracle",
           "prepost:monitor_contract", "--profiles", profiles, "--report", report_b, "--workers", "1"});
  EXPECT_EQ(r.code, 0);
  const auto a = reliquant::read_report(testing_support::slurp(report_a));
  const auto b = reliquant::read_report(testing_support::slurp(report_b));
  EXPECT_TRUE(a.same_outcome(b));
}

TEST_F(CliFiles, RunValidationErrorsExitTwo) {
  const auto domain = small_domain();
  const auto stat = file("st.spec", "mode=statistical\nn=10\nprofile=flat\n");
  const auto ex = file("ex.spec", "mode=exhaustive\n");
  auto base = [&](const std::string& spec) {
    return std::vector<std::string>{"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor",
                                    "--oracle", "expected:monitor_reference"};
  };
  EXPECT_EQ(cli(base(stat)).code, 2);  // no --profiles
  auto with_profiles = base(stat);
  with_profiles.push_back("--profiles");
  with_profiles.push_back(file("other.profiles", "profile other\nstratum w=1\n"));
  EXPECT_EQ(cli(with_profiles).code, 2);  // profile not found
  EXPECT_EQ(cli(base(file("bad.spec", "mode=statistical\n"))).code, 2);
  auto bad_subject = base(ex);
  bad_subject[6] = "builtin:toaster";
  EXPECT_EQ(cli(bad_subject).code, 2);
  auto bad_domain = base(ex);
  bad_domain[2] = file("bad.domain", "field x int 3 1\n");
  EXPECT_EQ(cli(bad_domain).code, 2);
  auto zero_workers = base(ex);
  zero_workers.push_back("--workers");
  zero_workers.push_back("0");
  EXPECT_EQ(cli(zero_workers).code, 2);
  EXPECT_EQ(cli({"run", "--domain", domain}).code, 2);
}

TEST_F(CliFiles, SubjectBreakdownExitsThree) {
  const auto domain = small_domain();
  const auto ex = file("ex.spec", "mode=exhaustive\n");
  auto r = cli({"run", "--domain", domain, "--spec", ex, "--subject",
                "exec:" + std::string(RELIQUANT_FIXTURE_SUBJECT) + " die=10", "--oracle", "accept"});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("closed its output"), std::string::npos) << r.err;
}

TEST_F(CliFiles, WorkerPrecedence) {
  const auto domain = small_domain();
  const auto no_workers = file("a.spec", "mode=exhaustive\n");
  const auto two_workers = file("b.spec", "mode=exhaustive\nworkers=2\n");
  auto run = [&](const std::string& spec, std::vector<std::string> extra = {}) {
    std::vector<std::string> args{"run", "--domain", domain, "--spec", spec, "--subject", "builtin:monitor",
                                  "--oracle", "accept"};
    args.insert(args.end(), extra.begin(), extra.end());
    return cli(args);
  };
  EXPECT_NE(run(no_workers).out.find("workers:     1\n"), std::string::npos);
  ::setenv("RELIQUANT_WORKERS", "5", 1);
  EXPECT_NE(run(no_workers).out.find("workers:     5\n"), std::string::npos);
  EXPECT_NE(run(two_workers).out.find("workers:     2\n"), std::string::npos);
  EXPECT_NE(run(two_workers, {"--workers", "3"}).out.find("workers:     3\n"), std::string::npos);
  ::setenv("RELIQUANT_WORKERS", "zero", 1);
  EXPECT_EQ(run(no_workers).code, 2);
}

TEST_F(CliFiles, CorruptReportExitsTwo) {
  EXPECT_EQ(cli({"report", file("junk.report", "reliquant-report=1\nmode=exhaustive\n")}).code, 2);
  EXPECT_EQ(cli({"report", file("empty.report", "")}).code, 2);
  EXPECT_EQ(cli({"report", path("nope.report")}).code, 2);
}

TEST_F(CliFiles, NullSubjectThroughputIsOnlyAWarning) {
  const auto domain = file("big.domain", "field a int 0 1023\nfield b int 0 255\n");
  const auto ex = file("ex.spec", "mode=exhaustive\nworkers=2\n");
  const auto r = cli({"run", "--domain", domain, "--spec", ex, "--subject", "builtin:null", "--oracle", "accept"});
  EXPECT_EQ(r.code, 0);
  const auto summary = r.out.find("cases/s/worker");
  EXPECT_NE(summary, std::string::npos);
  if (!r.err.empty()) {
    EXPECT_NE(r.err.find("warning:"), std::string::npos);
  }
}
