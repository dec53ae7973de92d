#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sot {

enum class AnswerKind { single_mcq, multi_mcq, integer, numeric };

std::string_view to_string(AnswerKind kind);
std::optional<AnswerKind> parse_answer_kind(std::string_view s);
inline bool is_mcq(AnswerKind kind) {
  return kind == AnswerKind::single_mcq || kind == AnswerKind::multi_mcq;
}

struct OptionEntry {
  char label = 'A';
  std::string text;

  bool operator==(const OptionEntry&) const = default;
};

using LabelSet = std::set<char>;

// Typed gold answer: option labels, an integer, or a decimal.
struct GoldAnswer {
  std::variant<LabelSet, std::int64_t, double> value;

  const LabelSet* labels() const { return std::get_if<LabelSet>(&value); }
  const std::int64_t* integer() const {
    return std::get_if<std::int64_t>(&value);
  }
  const double* numeric() const { return std::get_if<double>(&value); }

  bool operator==(const GoldAnswer&) const = default;
};

struct Problem {
  std::string id;
  std::string subject;
  std::string question_text;
  AnswerKind answer_kind = AnswerKind::single_mcq;
  std::vector<OptionEntry> options;
  GoldAnswer gold;
  std::optional<std::string> human_explanation;
  std::string source_tag;

  bool operator==(const Problem&) const = default;
};

// Empty iff every invariant of `p` holds. Each entry starts with the name of
// the offending field followed by ": ".
std::vector<std::string> validate(const Problem& p);

// Parses one JSONL object. Throws DatasetError on schema or invariant
// violations (unknown keys included).
Problem problem_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Problem& p);
nlohmann::json gold_to_json(const GoldAnswer& gold);

struct LoadedProblems {
  std::vector<Problem> problems;
  std::vector<std::string> warnings;
};

// Reads a harness-native problem JSONL file. Blank lines are skipped.
// Throws DatasetError naming the line number (parse errors) or the problem id
// (invariant violations). A source_tag differing from `expected_source` is a
// warning, not an error; pass an empty `expected_source` to skip the check.
LoadedProblems load_problems(const std::filesystem::path& path,
                             std::string_view expected_source = {});

void write_problems(const std::filesystem::path& path,
                    std::span<const Problem> problems);

// 1-based position of the gold option of a single_mcq problem.
std::size_t gold_position(const Problem& p);

// Moves the gold option text of a single_mcq problem to `gold_position`
// (1-based), keeping the distractors in their original relative order and
// relabelling A, B, ... Throws PreconditionError on a non-single_mcq problem or
// an out-of-range position.
Problem permute_options(const Problem& p, std::size_t gold_position);

}  // namespace sot
