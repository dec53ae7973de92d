#include <gtest/gtest.h>

#include <regex>

#include "sot/analysis.hpp"
#include "sot/errors.hpp"
#include "sot/report.hpp"
#include "sot/text.hpp"
#include "support.hpp"

namespace sot {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class ReportTest : public ::testing::Test {
 protected:
  testing::TempDir dir_;
  std::shared_ptr<MockProvider> mock_ = std::make_shared<MockProvider>(testing::mock_config("mock"));

  fs::path make_run(const std::string& run_id, StrategySpec spec, const std::string& model,
                    std::vector<Problem> problems = testing::synthetic_gpqa(9),
                    std::optional<std::string> narrator = std::nullopt) {
    if (narrator) std::get<StoryOfThought>(spec).narrator_model = *narrator;
    RunManifest m = testing::mock_manifest(dir_.path(), problems, std::move(spec), run_id);
    m.solver_model.model_id = model;
    ExecuteOptions opts;
    opts.registry = testing::registry_of(mock_);
    EXPECT_TRUE(execute_run(m, opts).complete);
    return m.run_dir();
  }

  void analyze(const fs::path& run) {
    testing::OrthogonalEmbedder embedder;
    AnalyzeOptions ao;
    ao.annotator = {mock_.get(), "annotator"};
    ao.embedder = &embedder;
    ao.embedder_name = "orthogonal";
    analyze_run(run, ao, nullptr);
  }

  TableSpec spec(TableKind kind, std::vector<fs::path> inputs) {
    TableSpec s;
    s.kind = kind;
    s.inputs = std::move(inputs);
    s.output_dir = dir_.path() / "report";
    return s;
  }
};

std::vector<std::string> first_column(const Table& t) {
  std::vector<std::string> out;
  for (const auto& row : t.rows) out.push_back(row.at(0).text);
  return out;
}

TEST_F(ReportTest, SingleCellGpqaGrid) {
  Table t = render_table(spec(TableKind::gpqa_grid, {make_run("r", StoryOfThought{}, "m1")}));
  EXPECT_EQ(t.header, (std::vector<std::string>{"Prompting Method", "m1"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0][0].text, "SoT");
  EXPECT_FALSE(t.rows[0][1].bold);
  EXPECT_TRUE(std::regex_match(t.rows[0][1].text, std::regex(R"(\d{1,3}\.\d\d)")));
}

TEST_F(ReportTest, GpqaGridRowOrderBoldAndBaselines) {
  std::vector<fs::path> runs = {make_run("a", StoryOfThought{}, "m1"),
                                make_run("b", ZeroShot{}, "m1"),
                                make_run("c", ZeroShotCot{}, "m2"),
                                make_run("d", ZeroShot{}, "m2")};
  Table t = render_table(spec(TableKind::gpqa_grid, runs));
  EXPECT_EQ(t.header, (std::vector<std::string>{"Prompting Method", "m1", "m2"}));
  EXPECT_EQ(first_column(t), (std::vector<std::string>{"Zero-shot", "Zero-shot CoT", "SoT"}));
  EXPECT_EQ(t.rows[1][1].text, "-");
  for (std::size_t c = 1; c <= 2; ++c) {
    double best = -1;
    for (const auto& row : t.rows) {
      if (row[c].value) best = std::max(best, *row[c].value);
    }
    for (const auto& row : t.rows) {
      EXPECT_EQ(row[c].bold, row[c].value && *row[c].value == best);
    }
  }

  TableSpec with_base = spec(TableKind::gpqa_grid, {runs[0]});
  with_base.baselines = {runs[0]};
  Table d = render_table(with_base);
  EXPECT_NE(d.rows[0][1].text.find(" (0.00)"), std::string::npos) << d.rows[0][1].text;
}

TEST_F(ReportTest, MarkdownAndCsvAgree) {
  std::vector<fs::path> runs = {make_run("a", StoryOfThought{}, "m|1"),
                                make_run("b", ZeroShot{}, "m|1")};
  Table t = render_table(spec(TableKind::gpqa_grid, runs));
  const std::string md = to_markdown(t);
  const auto md_lines = split_lines(md);
  EXPECT_EQ(md_lines[0], "| Prompting Method | m\\|1 |");
  EXPECT_EQ(md_lines[1], "|---|---:|");
  const auto csv_lines = split_lines(to_csv(t));
  ASSERT_EQ(csv_lines.size() + 1, md_lines.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto csv_cells = parse_csv_line(csv_lines[i + 1]);
    std::string md_row = md_lines[i + 2];
    md_row = replace_all(md_row, "**", "");
    md_row = replace_all(md_row, "\\|", "\x01");
    std::vector<std::string> md_cells;
    std::string cell;
    for (std::size_t k = 1; k < md_row.size(); ++k) {
      if (md_row[k] == '|') {
        md_cells.push_back(replace_all(trim(cell), "\x01", "|"));
        cell.clear();
      } else {
        cell += md_row[k];
      }
    }
    EXPECT_EQ(md_cells, csv_cells);
  }
}

TEST_F(ReportTest, JeebenchGridColumnOrder) {
  Table t = render_table(
      spec(TableKind::jeebench_grid,
           {make_run("j", StoryOfThought{}, "m1", testing::synthetic_jeebench())}));
  EXPECT_EQ(t.header, (std::vector<std::string>{"Model", "Method", "Chemistry", "Mathematics",
                                                "Physics", "Integer", "Single-Correct",
                                                "Multi-Correct", "Numeric", "Total"}));
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].size(), 10u);
  // Fractions with three decimals.
  EXPECT_EQ(t.rows[0][9].text.size(), 5u);
  EXPECT_THROW(render_table(spec(TableKind::gpqa_grid, {dir_.path() / "runs" / "j"})),
               ConfigError);
}

TEST_F(ReportTest, AblationRows) {
  std::vector<fs::path> runs;
  for (auto tech : kAllTechniques) {
    StoryOfThought s;
    s.techniques = {tech};
    runs.push_back(make_run(std::string(short_code(tech)), s, "m1"));
  }
  runs.push_back(make_run("all", StoryOfThought{}, "m1"));
  Table t = render_table(spec(TableKind::ablation, runs));
  EXPECT_EQ(first_column(t),
            (std::vector<std::string>{"Progressive Disclosure", "Branching", "Analogy",
                                      "Analogical Reasoning", "Metaphor", "All"}));
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_NE(t.rows[i][1].text.find('('), std::string::npos);
  }
  EXPECT_EQ(t.rows[5][1].text.find('('), std::string::npos);
}

TEST_F(ReportTest, TransferTable) {
  std::vector<fs::path> runs = {make_run("own1", StoryOfThought{}, "s1"),
                                make_run("n1s1", StoryOfThought{}, "s1", testing::synthetic_gpqa(9), "big"),
                                make_run("n1s2", StoryOfThought{}, "s2", testing::synthetic_gpqa(9), "big")};
  Table t = render_table(spec(TableKind::transfer, runs));
  EXPECT_EQ(t.header, (std::vector<std::string>{"Narrative Generator", "s1", "s2"}));
  EXPECT_EQ(first_column(t), (std::vector<std::string>{"big"}));
  EXPECT_NE(t.rows[0][1].text.find('('), std::string::npos);
  EXPECT_EQ(t.rows[0][2].text.find('('), std::string::npos);
}

TEST_F(ReportTest, AnalysisTablesAndPlotData) {
  mock_->add_rule({"Label the narrative-based explanation",
                   "Progressive Disclosure: 1\nBranching: 2\nAnalogy: 0\nAnalogical Reasoning: 1\n"
                   "Metaphor: 3",
                   ""});
  fs::path a = make_run("a", StoryOfThought{}, "m1");
  fs::path b = make_run("b", StoryOfThought{}, "m2");
  analyze(a);
  analyze(b);

  Table totals = render_table(spec(TableKind::technique_totals, {a, b}));
  EXPECT_EQ(first_column(totals),
            (std::vector<std::string>{"PD", "BR", "AN", "AR", "ME", "\xCE\xA3"}));
  EXPECT_EQ(totals.rows[1][1].text, "18");
  EXPECT_EQ(totals.rows[5][2].text, "63");

  Table sim = render_table(spec(TableKind::similarity, {a, b}));
  EXPECT_EQ(sim.header, (std::vector<std::string>{"Model", "Embed-F1 (story_of_thought)",
                                                  "ROUGE-L (story_of_thought)",
                                                  "BLEU (story_of_thought)"}));
  EXPECT_EQ(sim.rows.size(), 2u);

  Table corr = render_table(spec(TableKind::correlation, {a}));
  EXPECT_EQ(corr.rows.size(), 50u);

  TableSpec s = spec(TableKind::technique_totals, {a, b});
  s.plot_data = {PlotKind::domain_breakdown, PlotKind::correlation_heatmap};
  ReportFiles files = write_report(s);
  ASSERT_EQ(files.csvs.size(), 3u);
  auto data_rows = [](const fs::path& p) {
    std::size_t n = 0;
    for (const auto& l : split_lines(testing::read_file(p))) n += l.empty() ? 0 : 1;
    return n - 1;
  };
  EXPECT_EQ(data_rows(files.csvs[1]), 6u);
  EXPECT_EQ(data_rows(files.csvs[2]), 100u);
  const std::string md = testing::read_file(files.markdown);
  EXPECT_EQ(md.rfind("# Narrative technique occurrences", 0), 0u);
  EXPECT_NE(md.find("tables/domain_breakdown.csv"), std::string::npos);

  EXPECT_THROW(render_table(spec(TableKind::technique_totals,
                                 {make_run("plain", ZeroShot{}, "m1")})),
               ConfigError);
}

TEST(TableSpecJson, ParsingAndErrors) {
  TableSpec s = table_spec_from_json(json{{"kind", "ablation"},
                                          {"inputs", {"runs/a", "runs/b"}},
                                          {"output_dir", "out"},
                                          {"plot_data", {"domain_breakdown"}}});
  EXPECT_EQ(s.kind, TableKind::ablation);
  EXPECT_EQ(s.inputs.size(), 2u);
  EXPECT_EQ(s.plot_data, std::vector<PlotKind>{PlotKind::domain_breakdown});
  EXPECT_THROW(table_spec_from_json(json{{"kind", "pie"}, {"inputs", {"a"}}, {"output_dir", "o"}}),
               ConfigError);
  EXPECT_THROW(table_spec_from_json(json{{"kind", "ablation"}, {"inputs", json::array()},
                                         {"output_dir", "o"}}),
               ConfigError);
  EXPECT_THROW(table_spec_from_json(json{{"kind", "ablation"}, {"inputs", {"a"}},
                                         {"output_dir", "o"}, {"extra", 1}}),
               ConfigError);
  EXPECT_THROW(table_spec_from_json(json{{"kind", "ablation"}, {"inputs", {"a"}},
                                         {"baselines", {"b"}}, {"output_dir", "o"}}),
               ConfigError);
}

TEST(MarkBest, NeedsTwoValues) {
  Table t;
  t.header = {"x", "y"};
  t.rows = {{{"a", std::nullopt, false}, {"1.00", 1.0, false}},
            {{"b", std::nullopt, false}, {"2.00 (+1.00↑)", 2.0, false}}};
  mark_best(t);
  EXPECT_FALSE(t.rows[0][1].bold);
  EXPECT_TRUE(t.rows[1][1].bold);
  EXPECT_EQ(split_lines(to_markdown(t))[3], "| b | **2.00** (+1.00↑) |");
}

}  // namespace
}  // namespace sot
