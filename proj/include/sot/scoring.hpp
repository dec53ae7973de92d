#pragma once

#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sot/datasets.hpp"
#include "sot/extraction.hpp"

namespace sot {

class ScoringError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class MultiCorrectRule { partial_credit, all_or_nothing };

struct ScoringPolicy {
  enum class Benchmark { gpqa, jeebench };

  Benchmark benchmark = Benchmark::gpqa;
  double numeric_tolerance = 0.01;
  MultiCorrectRule multi_rule = MultiCorrectRule::partial_credit;

  // "gpqa_exact", "jeebench_partial", "jeebench_all_or_nothing".
  std::string name() const;
  static ScoringPolicy from_name(std::string_view name);
  static ScoringPolicy gpqa() { return {}; }
  static ScoringPolicy jeebench() { return {Benchmark::jeebench}; }
};

// 1 when the predicted label set equals the gold set, else 0.
double score_gpqa(const PredictedAnswer& pred, const GoldAnswer& gold);

// single_mcq / integer: exact match. numeric: |pred - gold| <= tolerance.
// multi_mcq: 0 if any predicted label is wrong, else |pred & gold| / |gold|
// (or all-or-nothing under that rule).
double score_jeebench(const PredictedAnswer& pred, const GoldAnswer& gold,
                      AnswerKind kind, const ScoringPolicy& policy = ScoringPolicy::jeebench());

double score(const PredictedAnswer& pred, const Problem& p,
             const ScoringPolicy& policy);

struct ProblemScore {
  std::string problem_id;
  double score = 0.0;
  bool solved = false;

  static ProblemScore make(std::string id, double score) {
    return {std::move(id), score, score == 1.0};
  }
  bool operator==(const ProblemScore&) const = default;
};

enum class Dimension { overall, subject, answer_kind };
std::string_view to_string(Dimension d);
std::optional<Dimension> parse_dimension(std::string_view s);

struct GroupKey {
  Dimension dimension;
  std::string key;
  auto operator<=>(const GroupKey&) const = default;
};

struct GroupStat {
  double mean_score = 0.0;
  std::size_t n = 0;
  bool operator==(const GroupStat&) const = default;
};

struct ScoreCard {
  std::vector<ProblemScore> per_problem;
  std::map<GroupKey, GroupStat> groups;

  const GroupStat* find(Dimension d, const std::string& key) const;
  double overall() const;
};

// Group means over overall ("all"), subject and answer_kind. Throws
// PreconditionError on empty input.
ScoreCard aggregate(const std::vector<std::pair<Problem, ProblemScore>>& scores);

nlohmann::json to_json(const ScoreCard& card);
ScoreCard scorecard_from_json(const nlohmann::json& j);
// One row per group: dimension,key,mean_score,n
std::string to_csv(const ScoreCard& card);

// GPQA cells: percentage with 2 decimals ("51.01").
std::string format_percent(double mean);
// JEEBench cells: fraction with 3 decimals ("0.453").
std::string format_fraction(double mean);

}  // namespace sot
