#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sot/metrics.hpp"
#include "sot/prompts.hpp"
#include "sot/runner.hpp"

namespace sot {

inline constexpr std::size_t kTechniqueCount = std::size(kAllTechniques);

struct TechniqueCounts {
  std::string problem_id;
  // Indexed in canonical technique order.
  std::array<std::int64_t, kTechniqueCount> counts{};
  // Set when no "Technique: count" lines were found and the mention fallback
  // produced the counts.
  bool low_confidence = false;

  std::int64_t operator[](NarrativeTechnique t) const {
    return counts[static_cast<std::size_t>(t)];
  }
};

nlohmann::json to_json(const TechniqueCounts& c);

// Primary rule: lines such as "Analogy: 2" or "Analogy (2 occurrences)".
// Fallback: number of distinct non-empty lines naming the technique.
TechniqueCounts parse_annotation(std::string_view annotator_text,
                                 std::string problem_id = {});

struct TechniqueTotals {
  std::array<std::int64_t, kTechniqueCount> per_technique{};
  std::int64_t total = 0;
};

TechniqueTotals technique_totals(std::span<const TechniqueCounts> counts);

// Sample Pearson correlation; nullopt when either input has zero variance.
// Throws PreconditionError on a length mismatch or fewer than two points.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

enum class OutcomeGroup { solved, unsolved };
std::string_view to_string(OutcomeGroup g);

struct CorrelationMatrix {
  OutcomeGroup group = OutcomeGroup::solved;
  std::array<std::array<std::optional<double>, kTechniqueCount>, kTechniqueCount> entries{};
  std::size_t n = 0;
  bool insufficient_data = false;
};

// Splits rows by solved flag and correlates every technique pair per group.
// Throws PreconditionError when a row has no flag.
std::pair<CorrelationMatrix, CorrelationMatrix> technique_correlations(
    std::span<const TechniqueCounts> counts,
    const std::map<std::string, bool>& solved_flags);

// Long form: group,tech_a,tech_b,r,n,defined (50 data rows).
std::string correlations_csv(const std::pair<CorrelationMatrix, CorrelationMatrix>& m);
// technique,count rows PD, BR, AN, AR, ME, then the total.
std::string totals_csv(const TechniqueTotals& totals);

struct AnalyzeOptions {
  ModelEndpoint annotator;
  Embedder* embedder = nullptr;  // similarity skipped when null
  std::string embedder_name;
  int concurrency = 1;
  GenerationParams params;
};

struct AnalysisResult {
  // False for strategies without a narrative step.
  bool annotated = false;
  std::vector<TechniqueCounts> counts;
  TechniqueTotals totals;
  std::pair<CorrelationMatrix, CorrelationMatrix> correlations;
  std::optional<SimilarityReport> similarity;
  std::size_t annotation_failures = 0;
};

// Writes <run>/analysis/: annotations.jsonl, technique_totals.csv and
// correlations.csv for runs with a narrative step; similarity.json when an
// embedder is given and the dataset has human explanations; always
// analysis_meta.json.
AnalysisResult analyze_run(const std::filesystem::path& run_dir,
                           const AnalyzeOptions& options,
                           const ResponseCache* cache);

// The text compared against human explanations: the narrative for
// story_of_thought, otherwise the final step.
std::string reasoning_text(const StrategyTrace& trace);

}  // namespace sot
