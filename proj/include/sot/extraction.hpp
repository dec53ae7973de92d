#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sot/datasets.hpp"

namespace sot {

struct Abstain {
  bool operator==(const Abstain&) const = default;
};

struct PredictedAnswer {
  std::variant<Abstain, LabelSet, std::int64_t, double> value;

  bool is_abstain() const { return std::holds_alternative<Abstain>(value); }
  const LabelSet* labels() const { return std::get_if<LabelSet>(&value); }
  const std::int64_t* integer() const {
    return std::get_if<std::int64_t>(&value);
  }
  const double* numeric() const { return std::get_if<double>(&value); }

  bool operator==(const PredictedAnswer&) const = default;
};

nlohmann::json to_json(const PredictedAnswer& a);
// {"abstain": true} | {"labels": [...]} | {"integer": n} | {"numeric": x}
PredictedAnswer predicted_from_json(const nlohmann::json& j);
std::string describe(const PredictedAnswer& a);

class NumericParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Parses a complete numeric literal: optional sign, digits with optional
// fraction, optional exponent. Fractions like "3/4" are rejected.
double normalize_numeric(std::string_view s);

struct NumberMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  double value = 0.0;
};

// Standalone numbers in `line`, left to right. Accepts "1,000" grouping and
// "1.5 x 10^-3" notation; skips numbers glued to letters ("x2", "H2O") and
// fraction operands ("3/4").
std::vector<NumberMatch> find_numbers(std::string_view line);

// Cascade: last "Answer:" line, then the last choice phrase ("answer is (B)",
// "option B"), then (MCQ only) an option's full text in the final two lines,
// else abstain. Never returns a label outside the problem's options.
PredictedAnswer extract(std::string_view text, const Problem& p);

}  // namespace sot
