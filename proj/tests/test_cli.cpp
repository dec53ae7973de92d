#include <gtest/gtest.h>

#include <sstream>

#include "sot/cli.hpp"
#include "sot/runner.hpp"
#include "support.hpp"

namespace sot {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  testing::TempDir dir_;

  fs::path write_manifest(const std::string& run_id, const std::string& strategy) {
    write_problems(dir_ / "data.jsonl", testing::synthetic_gpqa(6));
    json m = {{"run_id", run_id},
              {"dataset_path", (dir_ / "data.jsonl").string()},
              {"strategy", {{"kind", strategy}}},
              {"solver_model", {{"model_id", "mock-solver"}, {"provider_id", "mock"}}},
              {"scoring", "gpqa"},
              {"concurrency", 2},
              {"output_dir", (dir_ / "runs").string()},
              {"cache_dir", (dir_ / "cache").string()},
              {"providers", json::array({json{{"provider_id", "mock"}, {"kind", "mock"}}})}};
    const fs::path path = dir_ / (run_id + ".json");
    testing::write_file(path, m.dump(2));
    return path;
  }
};

TEST_F(CliTest, ValidatePrintsCount) {
  write_problems(dir_ / "good.jsonl", testing::synthetic_gpqa(4));
  Outcome o = cli({"validate", "--dataset", (dir_ / "good.jsonl").string()});
  EXPECT_EQ(o.code, 0) << o.err;
  EXPECT_NE(o.out.find("4 problems OK"), std::string::npos);

  testing::write_file(dir_ / "bad.jsonl", "{\"id\": 1}\n");
  EXPECT_EQ(cli({"validate", "--dataset", (dir_ / "bad.jsonl").string()}).code, 1);
}

TEST_F(CliTest, RunScoreAnalyzeReportDiffCache) {
  Outcome run = cli({"run", "--manifest", write_manifest("sot", "story_of_thought").string()});
  ASSERT_EQ(run.code, 0) << run.err;
  const fs::path run_dir = dir_ / "runs" / "sot";
  EXPECT_TRUE(fs::exists(run_dir / "records.jsonl"));
  EXPECT_TRUE(fs::exists(run_dir / "scorecard.json"));
  EXPECT_TRUE(fs::exists(run_dir / "meta.json"));

  // Idempotent second invocation.
  const std::string records = testing::read_file(run_dir / "records.jsonl");
  ASSERT_EQ(cli({"run", "--manifest", (dir_ / "sot.json").string()}).code, 0);
  EXPECT_EQ(testing::read_file(run_dir / "records.jsonl"), records);

  Outcome score = cli({"score", "--run", run_dir.string(), "--policy", "gpqa_exact"});
  EXPECT_EQ(score.code, 0) << score.err;
  EXPECT_TRUE(fs::exists(run_dir / "scores" / "gpqa_exact" / "scorecard.json"));
  EXPECT_EQ(testing::read_file(run_dir / "scores" / "gpqa_exact" / "scorecard.json"),
            testing::read_file(run_dir / "scorecard.json"));

  Outcome analyze = cli({"analyze", "--run", run_dir.string(), "--annotator", "mock-annotator",
                         "--provider", "mock", "--embedder", "hash"});
  EXPECT_EQ(analyze.code, 0) << analyze.err;
  EXPECT_TRUE(fs::exists(run_dir / "analysis" / "technique_totals.csv"));
  EXPECT_TRUE(fs::exists(run_dir / "analysis" / "similarity.json"));

  ASSERT_EQ(cli({"run", "--manifest", write_manifest("zs", "zero_shot").string()}).code, 0);
  json spec = {{"kind", "gpqa_grid"},
               {"inputs", {run_dir.string(), (dir_ / "runs" / "zs").string()}},
               {"output_dir", (dir_ / "report").string()}};
  testing::write_file(dir_ / "spec.json", spec.dump());
  Outcome report = cli({"report", "--spec", (dir_ / "spec.json").string()});
  EXPECT_EQ(report.code, 0) << report.err;
  EXPECT_TRUE(fs::exists(dir_ / "report" / "report.md"));
  EXPECT_TRUE(fs::exists(dir_ / "report" / "tables" / "gpqa_grid.csv"));

  Outcome diff = cli({"diff", "--a", (dir_ / "runs" / "zs").string(), "--b", run_dir.string()});
  EXPECT_EQ(diff.code, 0) << diff.err;

  Outcome stats = cli({"cache", "stats", "--cache-dir", (dir_ / "cache").string()});
  EXPECT_EQ(stats.code, 0);
  EXPECT_NE(stats.out.find("entries: "), std::string::npos);
  EXPECT_EQ(stats.out.find("entries: 0\n"), std::string::npos);
  Outcome clear = cli({"cache", "clear", "--cache-dir", (dir_ / "cache").string()});
  EXPECT_EQ(clear.code, 0);
  EXPECT_NE(cli({"cache", "stats", "--cache-dir", (dir_ / "cache").string()}).out.find("entries: 0\n"),
            std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  Outcome unknown = cli({"validate", "--dataset", "x.jsonl", "--bogus"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("error: "), std::string::npos);
  EXPECT_NE(unknown.err.find("Usage"), std::string::npos);

  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);

  testing::write_file(dir_ / "bad.json", "{\"run_id\": \"x\"}");
  Outcome bad = cli({"run", "--manifest", (dir_ / "bad.json").string()});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("missing"), std::string::npos);
}

TEST_F(CliTest, HelpOnEverySubcommand) {
  for (const char* sub : {"run", "score", "analyze", "report", "diff", "cache", "validate"}) {
    Outcome o = cli({sub, "--help"});
    EXPECT_EQ(o.code, 0) << sub;
    EXPECT_NE(o.out.find(sub), std::string::npos) << sub;
  }
}

}  // namespace
}  // namespace sot
