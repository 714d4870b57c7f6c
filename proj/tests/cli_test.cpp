#include <gtest/gtest.h>

#include <sstream>

#include "argbench/cli.hpp"
#include "argbench/dataset.hpp"
#include "argbench/evaluation.hpp"
#include "argbench/metrics.hpp"
#include "test_support.hpp"

using namespace argbench;
using namespace argbench::testing;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_config(const std::filesystem::path& path, const std::string& provider) {
  write_file(path, "{\"config_version\": 1, \"provider\": \"" + provider + "\"}\n");
}

std::string dir_listing(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir)) names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::string out;
  for (const auto& n : names) out += n + "\n";
  return out;
}

}  // namespace

TEST(CliTest, VersionAndHelpExitZero) {
  EXPECT_EQ(run({"--version"}).code, 0);
  EXPECT_NE(run({"--version"}).out.find(std::string(cli::kToolVersion)), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, 0);
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
}

TEST(CliGenerateTest, WritesDatasetAndSummary) {
  TempDir dir;
  const auto r = run({"generate", "--family", "linear", "--n-min", "1", "--n-max", "25", "--variations", "100", "--seed",
                      "2024", "--out", (dir / "lin.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 2500 instances"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("yes fraction 52.00% (1300/2500)"), std::string::npos) << r.out;
  EXPECT_EQ(count_lines(dir / "lin.jsonl"), 2500u);

  const auto nl = run({"generate", "--family", "nonlinear", "--n-max", "15", "--variations", "5", "--out",
                       (dir / "nl.jsonl").string()});
  ASSERT_EQ(nl.code, 0) << nl.err;
  EXPECT_NE(nl.out.find("(225/2540)"), std::string::npos) << nl.out;
}

TEST(CliGenerateTest, ValidationFailuresWriteNothing) {
  TempDir dir;
  const auto out = (dir / "d.jsonl").string();
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"generate", "--n-min", "5", "--n-max", "4", "--out", out},
           {"generate", "--n-min", "0", "--out", out},
           {"generate", "--variations", "0", "--out", out},
           {"generate", "--family", "cyclic", "--out", out},
           {"generate", "--n-max", "abc", "--out", out},
       }) {
    const auto r = run(args);
    EXPECT_EQ(r.code, cli::kUsage) << args[1];
    EXPECT_FALSE(r.err.empty());
    EXPECT_TRUE(r.out.empty());
    EXPECT_FALSE(std::filesystem::exists(out));
  }
  const auto bad_range = run({"generate", "--n-min", "5", "--n-max", "4", "--out", out});
  EXPECT_NE(bad_range.err.find("n-min"), std::string::npos) << bad_range.err;
}

TEST(CliGenerateTest, EnvironmentAndCapacityErrors) {
  TempDir dir;
  const auto r = run({"generate", "--names", (dir / "missing.txt").string(), "--out", (dir / "d.jsonl").string()});
  EXPECT_EQ(r.code, cli::kEnvironment);
  EXPECT_EQ(run({"generate", "--out", (dir / "no/such/d.jsonl").string()}).code, cli::kEnvironment);

  write_file(dir / "names.txt", "A\nB\n");
  const auto cap = run({"generate", "--names", (dir / "names.txt").string(), "--n-max", "3", "--out",
                        (dir / "d.jsonl").string()});
  EXPECT_EQ(cap.code, cli::kUsage);
  EXPECT_FALSE(std::filesystem::exists(dir / "d.jsonl"));
}

TEST(CliPipelineTest, GenerateEvaluateScoreReportHardSubset) {
  TempDir dir;
  const auto ds = (dir / "nl.jsonl").string();
  ASSERT_EQ(run({"generate", "--family", "nonlinear", "--n-max", "8", "--variations", "3", "--shuffled", "--out", ds}).code,
            0);
  write_config(dir / "oracle.json", "oracle");
  write_config(dir / "yes.json", "always-yes");

  const auto ev = run({"evaluate", "--dataset", ds, "--model", (dir / "oracle.json").string(), "--run",
                       (dir / "runs/oracle").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("unparsed 0, failed 0"), std::string::npos) << ev.out;
  EXPECT_TRUE(std::filesystem::exists(dir / "runs/oracle/manifest.json"));
  const auto again = run({"evaluate", "--dataset", ds, "--model", (dir / "oracle.json").string(), "--run",
                          (dir / "runs/oracle").string()});
  EXPECT_NE(again.out.find("0 new requests"), std::string::npos) << again.out;

  ASSERT_EQ(run({"evaluate", "--dataset", ds, "--model", (dir / "yes.json").string(), "--run",
                 (dir / "runs/yes").string()})
                .code,
            0);

  const auto sc = run({"score", "--results", (dir / "runs/oracle").string(), "--dataset", ds, "--out",
                       (dir / "scored/oracle").string()});
  ASSERT_EQ(sc.code, 0) << sc.err;
  EXPECT_TRUE(sc.out.starts_with(metrics_csv_header() + "\n100.0000,100.0000,100.0000,")) << sc.out;
  EXPECT_EQ(dir_listing(dir / "scored/oracle"),
            "breakdown_label.csv\nbreakdown_n_args.csv\nbreakdown_n_args_no.csv\nbreakdown_n_args_yes.csv\n"
            "breakdown_num_paths.csv\nmetrics.csv\n");
  ASSERT_EQ(run({"score", "--results", (dir / "runs/yes").string(), "--dataset", ds, "--out",
                 (dir / "scored/yes").string()})
                .code,
            0);

  const auto rep = run({"report", "--run", "oracle=" + (dir / "scored/oracle").string(), "--run",
                        (dir / "scored/yes").string(), "--out", (dir / "report").string()});
  ASSERT_EQ(rep.code, 0) << rep.err;
  const auto listing = dir_listing(dir / "report");
  for (const char* f : {"oracle_n_args.svg", "yes_num_paths.svg", "combined_metrics.csv", "combined_label.csv"}) {
    EXPECT_NE(listing.find(f), std::string::npos) << f << "\n" << listing;
  }
  const auto svg = read_file(dir / "report/oracle_n_args.svg");
  EXPECT_NE(svg.find(">answer yes</text>"), std::string::npos);
  EXPECT_TRUE(read_file(dir / "report/combined_metrics.csv").starts_with("metric,oracle,yes\n"));

  const auto hs = run({"hard-subset", "--results-a", (dir / "runs/oracle").string(), "--results-b",
                       (dir / "runs/yes").string(), "--dataset", ds, "--out", (dir / "hard.jsonl").string()});
  ASSERT_EQ(hs.code, 0) << hs.err;
  const auto hard = read_dataset(dir / "hard.jsonl");
  const auto full = read_dataset(ds);
  const auto no_count = std::count_if(full.begin(), full.end(), [](const auto& i) { return !i.label; });
  EXPECT_EQ(static_cast<long>(hard.size()), no_count);
  for (const auto& i : hard) EXPECT_FALSE(i.label);
  EXPECT_NE(hs.out.find("hard subset: " + std::to_string(hard.size())), std::string::npos);

  const auto none = run({"hard-subset", "--results-a", (dir / "runs/oracle").string(), "--results-b",
                         (dir / "runs/oracle").string(), "--dataset", ds, "--out", (dir / "none.jsonl").string()});
  EXPECT_EQ(none.code, 0);
  EXPECT_NE(none.err.find("warning"), std::string::npos);
  EXPECT_EQ(count_lines(dir / "none.jsonl"), 0u);
}

TEST(CliPipelineTest, ByteDeterministicAcrossRuns) {
  std::vector<std::string> snapshots;
  for (int round = 0; round < 2; ++round) {
    TempDir dir;
    const auto ds = (dir / "d.jsonl").string();
    ASSERT_EQ(run({"generate", "--family", "nonlinear", "--n-max", "7", "--variations", "2", "--seed", "11", "--out", ds})
                  .code,
              0);
    write_config(dir / "m.json", "oracle");
    ASSERT_EQ(run({"evaluate", "--dataset", ds, "--model", (dir / "m.json").string(), "--run", (dir / "run").string()})
                  .code,
              0);
    ASSERT_EQ(run({"score", "--results", (dir / "run").string(), "--dataset", ds, "--out", (dir / "s").string()}).code, 0);
    ASSERT_EQ(run({"report", "--run", "r=" + (dir / "s").string(), "--out", (dir / "rep").string()}).code, 0);
    std::string snapshot = read_file(ds) + read_file(dir / "run/results.jsonl");
    for (const auto& sub : {"s", "rep"}) {
      for (const auto& e : std::filesystem::directory_iterator(dir / sub)) snapshot += read_file(e.path());
      snapshot += dir_listing(dir / sub);
    }
    snapshots.push_back(snapshot);
  }
  EXPECT_EQ(snapshots[0], snapshots[1]);
}

TEST(CliEvaluateTest, ErrorsHappenBeforeAnyRequest) {
  TempDir dir;
  const auto ds = (dir / "d.jsonl").string();
  ASSERT_EQ(run({"generate", "--n-max", "3", "--variations", "1", "--out", ds}).code, 0);
  write_config(dir / "m.json", "oracle");
  write_file(dir / "blocker", "x");
  const auto blocked = run({"evaluate", "--dataset", ds, "--model", (dir / "m.json").string(), "--run",
                            (dir / "blocker/run").string()});
  EXPECT_EQ(blocked.code, cli::kEnvironment);

  write_file(dir / "bad.json", "{\"config_version\": 1, \"provider\": \"nope\"}");
  EXPECT_EQ(run({"evaluate", "--dataset", ds, "--model", (dir / "bad.json").string(), "--run", (dir / "r").string()}).code,
            cli::kUsage);
  EXPECT_FALSE(std::filesystem::exists(dir / "r/results.jsonl"));
  write_file(dir / "http.json",
             R"({"config_version": 1, "provider": "http-chat", "endpoint": "http://127.0.0.1:1/v1/chat/completions",
                 "model": "m", "api_key_env": "ARGBENCH_UNSET_TEST_KEY"})");
  ::unsetenv("ARGBENCH_UNSET_TEST_KEY");
  const auto no_key = run({"evaluate", "--dataset", ds, "--model", (dir / "http.json").string(), "--run",
                           (dir / "http-run").string()});
  EXPECT_EQ(no_key.code, cli::kEnvironment);
  EXPECT_NE(no_key.err.find("ARGBENCH_UNSET_TEST_KEY"), std::string::npos);
  EXPECT_FALSE(std::filesystem::exists(dir / "http-run"));
  EXPECT_EQ(run({"evaluate", "--dataset", (dir / "none.jsonl").string(), "--model", (dir / "m.json").string(), "--run",
                 (dir / "r").string()})
                .code,
            cli::kEnvironment);
}

TEST(CliScoreTest, CoverageMismatchIsAnIntegrityError) {
  TempDir dir;
  const auto small = (dir / "small.jsonl").string();
  const auto big = (dir / "big.jsonl").string();
  ASSERT_EQ(run({"generate", "--n-max", "3", "--variations", "2", "--out", small}).code, 0);
  ASSERT_EQ(run({"generate", "--n-max", "4", "--variations", "2", "--out", big}).code, 0);
  write_config(dir / "m.json", "oracle");
  ASSERT_EQ(run({"evaluate", "--dataset", small, "--model", (dir / "m.json").string(), "--run", (dir / "run").string()})
                .code,
            0);
  const auto r = run({"score", "--results", (dir / "run").string(), "--dataset", big, "--out", (dir / "s").string()});
  EXPECT_EQ(r.code, cli::kIntegrity);
  EXPECT_FALSE(std::filesystem::exists(dir / "s/metrics.csv"));
  EXPECT_EQ(run({"score", "--results", (dir / "run").string(), "--dataset", small, "--breakdown", "depth", "--out",
                 (dir / "s").string()})
                .code,
            cli::kUsage);
}

TEST(CliScoreTest, AllFailedRunCannotBeScored) {
  TempDir dir;
  const auto ds = (dir / "d.jsonl").string();
  ASSERT_EQ(run({"generate", "--n-max", "3", "--variations", "1", "--out", ds}).code, 0);
  write_file(dir / "f.json", "{\"config_version\": 1, \"provider\": \"fixtures\", \"fixtures\": \"replies.jsonl\"}");
  write_file(dir / "replies.jsonl", "");
  ASSERT_EQ(run({"evaluate", "--dataset", ds, "--model", (dir / "f.json").string(), "--run", (dir / "run").string()}).code,
            0);
  const auto r = run({"score", "--results", (dir / "run").string(), "--dataset", ds, "--out", (dir / "s").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
}

TEST(CliLabelTest, PrintsGroundedLabelling) {
  const auto r = run({"label", "--topology", "star:1+2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0:OUT\n1:IN\n2:OUT\n3:IN\n");
  EXPECT_EQ(run({"label", "--topology", "linear:3"}).out, "0:IN\n1:OUT\n2:IN\n");
  EXPECT_EQ(run({"label", "--topology", "linear:0"}).code, cli::kUsage);
  EXPECT_EQ(run({"label", "--topology", "ring:3"}).code, cli::kUsage);
}
