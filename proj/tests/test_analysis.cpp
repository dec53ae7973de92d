#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "sot/analysis.hpp"
#include "sot/errors.hpp"
#include "sot/text.hpp"
#include "support.hpp"

namespace sot {
namespace {

using nlohmann::json;

std::optional<double> r(std::vector<double> x, std::vector<double> y) { return pearson(x, y); }

TEST(ParseAnnotation, PrimaryRule) {
  TechniqueCounts c = parse_annotation(
      "Progressive Disclosure: 3\nBranching: 0\nAnalogy: 2\nAnalogical Reasoning: 1\nMetaphor: 1",
      "p1");
  EXPECT_EQ(c.problem_id, "p1");
  EXPECT_EQ(c.counts, (std::array<std::int64_t, 5>{3, 0, 2, 1, 1}));
  EXPECT_FALSE(c.low_confidence);
}

TEST(ParseAnnotation, DecoratedAndParenthesizedLines) {
  TechniqueCounts c = parse_annotation(
      "Here is my labeling.\n- **Progressive Disclosure**: 2\n2. Analogies (3 occurrences)\n"
      "* Metaphor = 4");
  EXPECT_EQ(c[NarrativeTechnique::progressive_disclosure], 2);
  EXPECT_EQ(c[NarrativeTechnique::analogy], 3);
  EXPECT_EQ(c[NarrativeTechnique::metaphor], 4);
  EXPECT_EQ(c[NarrativeTechnique::branching], 0);
  EXPECT_EQ(c[NarrativeTechnique::analogical_reasoning], 0);
}

TEST(ParseAnnotation, FallbackCountsLabeledSpans) {
  // Hand-labeled fixture: two analogy spans, nothing else.
  const char* fixture =
      "The explanation opens by comparing the electromagnetic field to a postal service; "
      "this is an analogy.\n"
      "Later the photon is compared to a courier delivering letters, a second analogy.\n"
      "Overall the narrative reads clearly.";
  TechniqueCounts c = parse_annotation(fixture);
  EXPECT_TRUE(c.low_confidence);
  EXPECT_EQ(c.counts, (std::array<std::int64_t, 5>{0, 0, 2, 0, 0}));
}

TEST(ParseAnnotation, UnmentionedTechniqueIsZero) {
  TechniqueCounts c = parse_annotation("Metaphor: 2");
  EXPECT_EQ(c[NarrativeTechnique::branching], 0);
  EXPECT_EQ(c[NarrativeTechnique::metaphor], 2);
}

TEST(TechniqueTotals, SumsAndOrderInvariance) {
  EXPECT_EQ(technique_totals({}).total, 0);
  std::vector<TechniqueCounts> rows(2);
  rows[0].counts = {1, 0, 2, 0, 1};
  rows[1].counts = {2, 1, 0, 0, 3};
  TechniqueTotals t = technique_totals(rows);
  EXPECT_EQ(t.per_technique[0], 3);
  EXPECT_EQ(t.total, 10);
  std::reverse(rows.begin(), rows.end());
  EXPECT_EQ(technique_totals(rows).per_technique, t.per_technique);
  EXPECT_EQ(totals_csv(t),
            "technique,count\nPD,3\nBR,1\nAN,2\nAR,0\nME,4\ntotal,10\n");
}

TEST(Pearson, HandDerivedValues) {
  EXPECT_NEAR(*r({1, 2, 3}, {2, 4, 6}), 1.0, 1e-12);
  EXPECT_NEAR(*r({1, 2, 3}, {3, 2, 1}), -1.0, 1e-12);
  EXPECT_NEAR(*r({1, 2, 3}, {1, 3, 2}), 0.5, 1e-12);
  EXPECT_FALSE(r({1, 1, 1}, {1, 2, 3}).has_value());
  EXPECT_THROW(r({1, 2}, {1, 2, 3}), PreconditionError);
  EXPECT_THROW(r({1}, {1}), PreconditionError);
}

TEST(Pearson, SymmetryAndAffineInvariance) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 3.0);
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = normal(rng);
      y[i] = normal(rng);
    }
    const auto rxy = pearson(x, y);
    const auto ryx = pearson(y, x);
    ASSERT_TRUE(rxy && ryx);
    ASSERT_NEAR(*rxy, *ryx, 1e-12);
    ASSERT_LE(std::abs(*rxy), 1.0);
    double a = coef(rng);
    if (std::abs(a) < 0.1) a = 0.1;
    const double b = coef(rng);
    std::vector<double> ax(n);
    for (std::size_t i = 0; i < n; ++i) ax[i] = a * x[i] + b;
    ASSERT_NEAR(*pearson(ax, y), (a > 0 ? 1 : -1) * *rxy, 1e-9);
  }
}

std::vector<TechniqueCounts> rows_with(std::size_t n, auto fill) {
  std::vector<TechniqueCounts> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].problem_id = "p" + std::to_string(i);
    fill(i, rows[i].counts);
  }
  return rows;
}

TEST(Correlations, GroupsAndUndefinedEntries) {
  auto rows = rows_with(6, [](std::size_t i, auto& c) {
    c = {static_cast<std::int64_t>(i % 3), 4, static_cast<std::int64_t>(2 * (i % 4)),
         static_cast<std::int64_t>(i), static_cast<std::int64_t>(i % 4)};
  });
  std::map<std::string, bool> solved;
  for (std::size_t i = 0; i < rows.size(); ++i) solved[rows[i].problem_id] = i % 2 == 0;
  auto [s, u] = technique_correlations(rows, solved);
  EXPECT_EQ(s.group, OutcomeGroup::solved);
  EXPECT_EQ(u.group, OutcomeGroup::unsolved);
  EXPECT_EQ(s.n, 3u);
  EXPECT_EQ(u.n, 3u);
  for (const auto* m : {&s, &u}) {
    // BR is constant.
    for (std::size_t k = 0; k < 5; ++k) EXPECT_FALSE(m->entries[1][k].has_value());
    // AN = 2 * ME.
    ASSERT_TRUE(m->entries[2][4].has_value());
    EXPECT_NEAR(*m->entries[2][4], 1.0, 1e-12);
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = 0; b < 5; ++b) {
        EXPECT_EQ(m->entries[a][b].has_value(), m->entries[b][a].has_value());
        if (m->entries[a][b]) {
          EXPECT_NEAR(*m->entries[a][b], *m->entries[b][a], 1e-12);
        }
      }
      if (m->entries[a][a]) {
        EXPECT_EQ(*m->entries[a][a], 1.0);
      }
    }
  }
  const std::string csv = correlations_csv({s, u});
  EXPECT_EQ(split_lines(csv).front(), "group,tech_a,tech_b,r,n,defined");
  std::size_t rows_out = 0;
  for (const auto& l : split_lines(csv)) rows_out += l.empty() ? 0 : 1;
  EXPECT_EQ(rows_out, 51u);
}

TEST(Correlations, AllSolvedFlagsUnsolvedInsufficient) {
  auto rows = rows_with(4, [](std::size_t i, auto& c) { c = {static_cast<std::int64_t>(i), 0, 0, 0, 0}; });
  std::map<std::string, bool> solved;
  for (const auto& row : rows) solved[row.problem_id] = true;
  auto [s, u] = technique_correlations(rows, solved);
  EXPECT_FALSE(s.insufficient_data);
  EXPECT_TRUE(u.insufficient_data);
  solved.erase("p0");
  EXPECT_THROW(technique_correlations(rows, solved), PreconditionError);
}

TEST(AnalyzeRun, StoryOfThoughtRunEndToEnd) {
  testing::TempDir dir;
  RunManifest m = testing::mock_manifest(dir.path(), testing::synthetic_gpqa(9), StoryOfThought{});
  auto mock = std::make_shared<MockProvider>(testing::mock_config("mock"));
  mock->add_rule({"Label the narrative-based explanation",
                  "Progressive Disclosure: 1\nBranching: 0\nAnalogy: 2\nAnalogical Reasoning: 0\n"
                  "Metaphor: 1",
                  ""});
  ExecuteOptions opts;
  opts.registry = testing::registry_of(mock);
  ASSERT_TRUE(execute_run(m, opts).complete);

  testing::OrthogonalEmbedder embedder;
  AnalyzeOptions ao;
  ao.annotator = {mock.get(), "annotator"};
  ao.embedder = &embedder;
  ao.embedder_name = "orthogonal";
  ao.concurrency = 3;
  ResponseCache cache(m.cache_dir);
  AnalysisResult res = analyze_run(m.run_dir(), ao, &cache);
  EXPECT_TRUE(res.annotated);
  EXPECT_EQ(res.counts.size(), 9u);
  EXPECT_EQ(res.totals.per_technique[2], 18);
  EXPECT_EQ(res.totals.total, 36);
  ASSERT_TRUE(res.similarity.has_value());
  EXPECT_EQ(res.similarity->n_pairs, 3u);

  const auto out = m.run_dir() / "analysis";
  for (const char* f : {"annotations.jsonl", "technique_totals.csv", "correlations.csv",
                        "similarity.json", "analysis_meta.json"}) {
    EXPECT_TRUE(std::filesystem::exists(out / f)) << f;
  }
  json sim = json::parse(testing::read_file(out / "similarity.json"));
  EXPECT_EQ(sim["reasoning_kind"], "story_of_thought");
  EXPECT_EQ(sim["n_pairs"], 3);
}

TEST(AnalyzeRun, NonNarrativeRunSkipsAnnotation) {
  testing::TempDir dir;
  RunManifest m = testing::mock_manifest(dir.path(), testing::synthetic_gpqa(3), ZeroShotCot{});
  auto mock = std::make_shared<MockProvider>(testing::mock_config("mock"));
  ExecuteOptions opts;
  opts.registry = testing::registry_of(mock);
  execute_run(m, opts);
  AnalyzeOptions ao;
  AnalysisResult res = analyze_run(m.run_dir(), ao, nullptr);
  EXPECT_FALSE(res.annotated);
  EXPECT_FALSE(res.similarity.has_value());
  EXPECT_FALSE(std::filesystem::exists(m.run_dir() / "analysis" / "technique_totals.csv"));
  EXPECT_TRUE(std::filesystem::exists(m.run_dir() / "analysis" / "analysis_meta.json"));
}

TEST(ReasoningText, NarrativeOrFinal) {
  StrategyTrace t;
  t.final_text = "final";
  EXPECT_EQ(reasoning_text(t), "final");
  t.steps.push_back({"narrate", {}, {}});
  t.steps.back().result.text = "story";
  EXPECT_EQ(reasoning_text(t), "story");
}

}  // namespace
}  // namespace sot
