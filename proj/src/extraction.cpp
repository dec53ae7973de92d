#include "sot/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <regex>

#include "sot/text.hpp"

namespace sot {

using nlohmann::json;

json to_json(const PredictedAnswer& a) {
  if (a.is_abstain()) return {{"abstain", true}};
  if (const auto* labels = a.labels()) {
    json arr = json::array();
    for (char l : *labels) arr.push_back(std::string(1, l));
    return {{"labels", arr}};
  }
  if (const auto* i = a.integer()) return {{"integer", *i}};
  return {{"numeric", *a.numeric()}};
}

PredictedAnswer predicted_from_json(const json& j) {
  if (j.contains("labels")) {
    LabelSet labels;
    for (const auto& l : j["labels"]) labels.insert(l.get<std::string>().at(0));
    return {labels};
  }
  if (j.contains("integer")) return {j["integer"].get<std::int64_t>()};
  if (j.contains("numeric")) return {j["numeric"].get<double>()};
  return {Abstain{}};
}

std::string describe(const PredictedAnswer& a) {
  if (a.is_abstain()) return "abstain";
  if (const auto* labels = a.labels()) {
    std::string out;
    for (char l : *labels) {
      if (!out.empty()) out += ',';
      out += l;
    }
    return out;
  }
  if (const auto* i = a.integer()) return std::to_string(*i);
  return format_trimmed(*a.numeric(), 12);
}

namespace {

bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return is_alpha(c) || is_digit(c); }

// Length of a decimal literal (no sign, no exponent) starting at `i`, or 0.
std::size_t scan_decimal(std::string_view s, std::size_t i) {
  std::size_t j = i;
  while (j < s.size() && is_digit(s[j])) ++j;
  bool int_digits = j > i;
  if (j < s.size() && s[j] == '.' && j + 1 < s.size() && is_digit(s[j + 1])) {
    ++j;
    while (j < s.size() && is_digit(s[j])) ++j;
    return j - i;
  }
  return int_digits ? j - i : 0;
}

// Length of "[eE][+-]?digits" at `i`, or 0.
std::size_t scan_exponent(std::string_view s, std::size_t i) {
  if (i >= s.size() || (s[i] != 'e' && s[i] != 'E')) return 0;
  std::size_t j = i + 1;
  if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
  std::size_t digits = j;
  while (j < s.size() && is_digit(s[j])) ++j;
  return j > digits ? j - i : 0;
}

double parse_plain(std::string_view s) {
  std::string buf(s);
  buf.erase(std::remove(buf.begin(), buf.end(), ','), buf.end());
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc() || ptr != buf.data() + buf.size()) {
    throw NumericParseError("not a number: \"" + std::string(s) + "\"");
  }
  return v;
}

constexpr std::string_view kUnicodeMinus = "\xE2\x88\x92";
constexpr std::string_view kTimes = "\xC3\x97";

}  // namespace

double normalize_numeric(std::string_view s) {
  std::string t = trim(s);
  std::string_view v = t;
  std::size_t i = 0;
  if (i < v.size() && (v[i] == '+' || v[i] == '-')) ++i;
  std::size_t n = scan_decimal(v, i);
  if (n == 0 && i < v.size() && v[i] == '.') {
    // ".5" form.
    std::size_t j = i + 1;
    while (j < v.size() && is_digit(v[j])) ++j;
    n = j > i + 1 ? j - i : 0;
  }
  if (n == 0) throw NumericParseError("not a number: \"" + t + "\"");
  i += n;
  i += scan_exponent(v, i);
  if (i != v.size()) throw NumericParseError("not a number: \"" + t + "\"");
  std::string buf(v);
  if (buf[0] == '+') buf.erase(0, 1);
  if (buf[0] == '.' || (buf[0] == '-' && buf.size() > 1 && buf[1] == '.')) {
    buf.insert(buf[0] == '-' ? 1 : 0, "0");
  }
  return parse_plain(buf);
}

std::vector<NumberMatch> find_numbers(std::string_view line) {
  std::vector<NumberMatch> out;
  std::size_t i = 0;
  while (i < line.size()) {
    // Optional sign: ASCII +/- or U+2212, not glued to a preceding alnum.
    std::size_t start = i;
    bool negative = false;
    std::size_t body = i;
    if (line[i] == '-' || line[i] == '+') {
      negative = line[i] == '-';
      body = i + 1;
    } else if (line.substr(i, kUnicodeMinus.size()) == kUnicodeMinus) {
      negative = true;
      body = i + kUnicodeMinus.size();
    }
    if (body != i && (start > 0 && is_alnum(line[start - 1]))) {
      ++i;
      continue;
    }
    if (body >= line.size()) break;
    bool leading_point = line[body] == '.' && body + 1 < line.size() &&
                         is_digit(line[body + 1]);
    if (!is_digit(line[body]) && !leading_point) {
      i = body == i ? i + 1 : body;
      continue;
    }
    // Reject numbers glued to letters, or continuing a digit run / decimal.
    if (body > 0 && body == start &&
        (is_alnum(line[body - 1]) || line[body - 1] == '_' ||
         (line[body - 1] == '.' && !leading_point) || line[body - 1] == '/')) {
      std::size_t j = body;
      while (j < line.size() && (is_alnum(line[j]) || line[j] == '.')) ++j;
      i = j;
      continue;
    }

    std::size_t j = body;
    std::string literal;
    // "1,234,567" grouping.
    std::size_t lead = 0;
    while (body + lead < line.size() && is_digit(line[body + lead])) ++lead;
    std::size_t k = body + lead;
    bool grouped = false;
    if (lead >= 1 && lead <= 3) {
      while (k + 3 < line.size() + 0 && line[k] == ',' && k + 4 <= line.size() &&
             is_digit(line[k + 1]) && is_digit(line[k + 2]) &&
             is_digit(line[k + 3]) &&
             (k + 4 == line.size() || !is_digit(line[k + 4]))) {
        k += 4;
        grouped = true;
      }
    }
    if (grouped) {
      j = k;
      if (j + 1 < line.size() && line[j] == '.' && is_digit(line[j + 1])) {
        ++j;
        while (j < line.size() && is_digit(line[j])) ++j;
      }
    } else if (leading_point) {
      j = body + 1;
      while (j < line.size() && is_digit(line[j])) ++j;
    } else {
      j = body + scan_decimal(line, body);
    }
    j += scan_exponent(line, j);
    std::string_view lit = line.substr(body, j - body);
    std::size_t end = j;

    // Glued to a following letter or a fraction bar.
    if (end < line.size() &&
        (is_alpha(line[end]) || line[end] == '_' ||
         (line[end] == '/' && end + 1 < line.size() && is_digit(line[end + 1])))) {
      std::size_t m = end;
      while (m < line.size() &&
             (is_alnum(line[m]) || line[m] == '/' || line[m] == '.')) {
        ++m;
      }
      i = m;
      continue;
    }

    std::string norm(lit);
    if (norm[0] == '.') norm.insert(0, "0");
    double value = parse_plain(norm);

    // "1.5 x 10^-3", "1.5 × 10^{-3}", "1.5 \times 10^3", "1.5*10^3".
    {
      std::size_t m = end;
      auto skip_ws = [&] {
        while (m < line.size() && line[m] == ' ') ++m;
      };
      skip_ws();
      bool has_times = false;
      if (line.substr(m, kTimes.size()) == kTimes) {
        m += kTimes.size();
        has_times = true;
      } else if (line.substr(m, 6) == "\\times") {
        m += 6;
        has_times = true;
      } else if (m < line.size() && (line[m] == 'x' || line[m] == '*')) {
        ++m;
        has_times = true;
      }
      if (has_times) {
        skip_ws();
        if (line.substr(m, 3) == "10^") {
          m += 3;
          bool brace = m < line.size() && line[m] == '{';
          if (brace) ++m;
          std::size_t exp_start = m;
          if (m < line.size() && (line[m] == '-' || line[m] == '+')) ++m;
          if (line.substr(m, kUnicodeMinus.size()) == kUnicodeMinus) {
            m += kUnicodeMinus.size();
          }
          std::size_t digits = m;
          while (m < line.size() && is_digit(line[m])) ++m;
          if (m > digits && (!brace || (m < line.size() && line[m] == '}'))) {
            std::string exp_text(line.substr(exp_start, digits - exp_start));
            int sign = (exp_text.find('-') != std::string::npos ||
                        exp_text.find(kUnicodeMinus) != std::string::npos)
                           ? -1
                           : 1;
            int e = std::stoi(std::string(line.substr(digits, m - digits)));
            value *= std::pow(10.0, sign * e);
            end = brace ? m + 1 : m;
          }
        }
      }
    }
    out.push_back({start, end, negative ? -value : value});
    i = end;
  }
  return out;
}

namespace {

bool in_range(char label, const Problem& p) {
  return std::any_of(p.options.begin(), p.options.end(),
                     [&](const OptionEntry& o) { return o.label == label; });
}

// A standalone word naming option labels: "B", or for multi_mcq a run of
// distinct in-range capitals such as "ABD".
struct LabelRun {
  std::size_t begin;
  std::size_t end;
  LabelSet labels;
};

std::vector<LabelRun> label_runs(std::string_view s, const Problem& p) {
  std::vector<LabelRun> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_alnum(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_alnum(s[j])) ++j;
    std::string_view word = s.substr(i, j - i);
    // "I'm", "A's" are words, not labels.
    bool apostrophe = j < s.size() && s[j] == '\'';
    bool multi_word = p.answer_kind == AnswerKind::multi_mcq && word.size() > 1;
    if (!apostrophe && (word.size() == 1 || multi_word)) {
      LabelSet labels;
      bool ok = true;
      for (char c : word) {
        if (c < 'A' || c > 'Z' || !in_range(c, p) || !labels.insert(c).second) {
          ok = false;
          break;
        }
      }
      if (ok) out.push_back({i, j, std::move(labels)});
    }
    i = j;
  }
  return out;
}

bool is_separator_gap(std::string_view gap) {
  std::string g = to_lower(gap);
  g = replace_all(g, "and", " ");
  return g.find_first_not_of(" \t,;&/()[]{}.*") == std::string::npos;
}

// Labels at the start of `s` for MCQ problems. Single: the first in-range
// letter. Multi: the first run and those chained to it by separators.
std::optional<LabelSet> letters_from(std::string_view s, const Problem& p) {
  const auto runs = label_runs(s, p);
  if (runs.empty()) return std::nullopt;
  LabelSet labels = runs[0].labels;
  if (p.answer_kind == AnswerKind::multi_mcq) {
    for (std::size_t i = 1; i < runs.size(); ++i) {
      if (!is_separator_gap(s.substr(runs[i - 1].end, runs[i].begin - runs[i - 1].end))) {
        break;
      }
      labels.insert(runs[i].labels.begin(), runs[i].labels.end());
    }
  }
  return labels;
}

PredictedAnswer from_number(double v, AnswerKind kind) {
  if (kind == AnswerKind::integer && std::abs(v) < 9.0e15 && std::floor(v) == v) {
    return {static_cast<std::int64_t>(v)};
  }
  return {v};
}

std::optional<PredictedAnswer> parse_content(std::string_view content,
                                             const Problem& p) {
  if (is_mcq(p.answer_kind)) {
    if (auto labels = letters_from(content, p)) return PredictedAnswer{*labels};
    return std::nullopt;
  }
  auto numbers = find_numbers(content);
  if (numbers.empty()) return std::nullopt;
  return from_number(numbers.back().value, p.answer_kind);
}

const std::regex& answer_label_re() {
  static const std::regex re(R"(\banswer\s*\**\s*:\s*\**)", std::regex::icase);
  return re;
}

const std::regex& choice_phrase_re() {
  static const std::regex re(
      R"(\b(?:answers?|options?|choices?)\b(?:\s+(?:is|are|would be|should be|must be|will be))?\s*:?\s*(?:\b(?:options?|choices?)\b\s*)?)",
      std::regex::icase);
  return re;
}

const std::regex& numeric_phrase_re() {
  static const std::regex re(
      R"(\banswers?\b\s*(?:is|would be|should be|must be|will be|=|:)\s*(?:approximately|about|around|roughly|equal to)?\s*)",
      std::regex::icase);
  return re;
}

// Rule 1.
std::optional<PredictedAnswer> rule_answer_line(
    const std::vector<std::string>& lines, const Problem& p) {
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    std::smatch m;
    std::string line = *it;
    std::optional<PredictedAnswer> found;
    auto begin = line.cbegin();
    // The last "Answer:" label on the line wins.
    std::size_t content_start = std::string::npos;
    while (std::regex_search(begin, line.cend(), m, answer_label_re())) {
      content_start = static_cast<std::size_t>(m[0].second - line.cbegin());
      begin = m[0].second;
    }
    if (content_start == std::string::npos) continue;
    if (auto parsed = parse_content(std::string_view(line).substr(content_start), p)) {
      return parsed;
    }
  }
  return std::nullopt;
}

// Rule 2.
std::optional<PredictedAnswer> rule_choice_phrase(
    const std::vector<std::string>& lines, const Problem& p) {
  for (auto it = lines.rbegin(); it != lines.rend(); ++it) {
    const std::string& line = *it;
    std::vector<PredictedAnswer> hits;
    if (is_mcq(p.answer_kind)) {
      for (std::sregex_iterator m(line.begin(), line.end(), choice_phrase_re()), e;
           m != e; ++m) {
        std::size_t pos = static_cast<std::size_t>(m->position(0) + m->length(0));
        std::string_view rest = std::string_view(line).substr(pos);
        // The letter must open the remainder: "(B)", "[B]" or "B".
        std::size_t skip = 0;
        while (skip < rest.size() && (rest[skip] == '(' || rest[skip] == '[' ||
                                      rest[skip] == '*' || rest[skip] == ' ')) {
          ++skip;
        }
        auto runs = label_runs(rest, p);
        if (runs.empty() || runs[0].begin != skip) continue;
        if (auto labels = letters_from(rest, p)) hits.push_back({*labels});
      }
    } else {
      for (std::sregex_iterator m(line.begin(), line.end(), numeric_phrase_re()), e;
           m != e; ++m) {
        std::size_t pos = static_cast<std::size_t>(m->position(0) + m->length(0));
        std::string_view rest = std::string_view(line).substr(pos);
        auto numbers = find_numbers(rest);
        if (numbers.empty()) continue;
        // Only wrappers such as "$", "\boxed{" may precede the number.
        std::string_view prefix = rest.substr(0, numbers.front().begin);
        std::string stripped = replace_all(std::string(prefix), "\\boxed", "");
        if (stripped.find_first_not_of(" ${(\\[*") != std::string::npos) continue;
        hits.push_back(from_number(numbers.front().value, p.answer_kind));
      }
    }
    if (!hits.empty()) return hits.back();
  }
  return std::nullopt;
}

// Rule 3 (MCQ only).
std::optional<PredictedAnswer> rule_option_text(
    const std::vector<std::string>& lines, const Problem& p) {
  std::vector<std::string> tail;
  for (auto it = lines.rbegin(); it != lines.rend() && tail.size() < 2; ++it) {
    if (!trim(*it).empty()) tail.push_back(to_lower(*it));
  }
  for (const auto& line : tail) {  // last line first
    struct Hit {
      char label;
      std::size_t end;
      std::size_t len;
    };
    std::vector<Hit> hits;
    for (const auto& opt : p.options) {
      std::string needle = to_lower(trim(opt.text));
      if (needle.empty()) continue;
      std::size_t pos = 0;
      std::optional<Hit> last;
      while ((pos = line.find(needle, pos)) != std::string::npos) {
        std::size_t end = pos + needle.size();
        bool left_ok = pos == 0 || !is_alnum(line[pos - 1]);
        bool right_ok = end == line.size() || !is_alnum(line[end]);
        if (left_ok && right_ok) last = Hit{opt.label, end, needle.size()};
        ++pos;
      }
      if (last) hits.push_back(*last);
    }
    if (hits.empty()) continue;
    if (p.answer_kind == AnswerKind::multi_mcq) {
      LabelSet labels;
      for (const auto& h : hits) labels.insert(h.label);
      return PredictedAnswer{labels};
    }
    auto best = std::max_element(hits.begin(), hits.end(),
                                 [](const Hit& a, const Hit& b) {
                                   if (a.end != b.end) return a.end < b.end;
                                   return a.len < b.len;
                                 });
    return PredictedAnswer{LabelSet{best->label}};
  }
  return std::nullopt;
}

}  // namespace

PredictedAnswer extract(std::string_view text, const Problem& p) {
  const auto lines = split_lines(text);
  if (auto a = rule_answer_line(lines, p)) return *a;
  if (auto a = rule_choice_phrase(lines, p)) return *a;
  if (is_mcq(p.answer_kind)) {
    if (auto a = rule_option_text(lines, p)) return *a;
  }
  return {Abstain{}};
}

}  // namespace sot
