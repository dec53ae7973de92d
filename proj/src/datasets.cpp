#include "sot/datasets.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "sot/errors.hpp"
#include "sot/text.hpp"

namespace sot {

using nlohmann::json;

std::string_view to_string(AnswerKind kind) {
  switch (kind) {
    case AnswerKind::single_mcq: return "single_mcq";
    case AnswerKind::multi_mcq: return "multi_mcq";
    case AnswerKind::integer: return "integer";
    case AnswerKind::numeric: return "numeric";
  }
  return "unknown";
}

std::optional<AnswerKind> parse_answer_kind(std::string_view s) {
  if (s == "single_mcq") return AnswerKind::single_mcq;
  if (s == "multi_mcq") return AnswerKind::multi_mcq;
  if (s == "integer") return AnswerKind::integer;
  if (s == "numeric") return AnswerKind::numeric;
  return std::nullopt;
}

std::vector<std::string> validate(const Problem& p) {
  std::vector<std::string> out;
  if (trim(p.id).empty()) out.push_back("id: must be non-empty");

  if (is_mcq(p.answer_kind)) {
    if (p.options.empty()) {
      out.push_back("options: required for " +
                    std::string(to_string(p.answer_kind)));
    }
    for (std::size_t i = 0; i < p.options.size(); ++i) {
      const auto& opt = p.options[i];
      if (i >= 26 || opt.label != static_cast<char>('A' + i)) {
        out.push_back("options: labels must be consecutive letters from A "
                      "(position " + std::to_string(i + 1) + ")");
        break;
      }
    }
    for (const auto& opt : p.options) {
      if (trim(opt.text).empty()) {
        out.push_back(std::string("options: empty text for label ") +
                      opt.label);
      }
    }
  } else if (!p.options.empty()) {
    out.push_back("options: must be empty for " +
                  std::string(to_string(p.answer_kind)));
  }

  switch (p.answer_kind) {
    case AnswerKind::single_mcq:
    case AnswerKind::multi_mcq: {
      const LabelSet* labels = p.gold.labels();
      if (labels == nullptr) {
        out.push_back("gold: expected option labels");
        break;
      }
      if (labels->empty()) {
        out.push_back("gold: labels must be non-empty");
      } else if (p.answer_kind == AnswerKind::single_mcq &&
                 labels->size() != 1) {
        out.push_back("gold: single_mcq needs exactly one label");
      }
      for (char l : *labels) {
        bool found = false;
        for (const auto& opt : p.options) found |= (opt.label == l);
        if (!found) {
          out.push_back(std::string("gold: label ") + l +
                        " not among options");
        }
      }
      break;
    }
    case AnswerKind::integer:
      if (p.gold.integer() == nullptr) {
        out.push_back("gold: expected an integer");
      }
      break;
    case AnswerKind::numeric:
      if (p.gold.numeric() == nullptr) {
        out.push_back("gold: expected a decimal");
      } else if (!std::isfinite(*p.gold.numeric())) {
        out.push_back("gold: decimal must be finite");
      }
      break;
  }
  return out;
}

namespace {

const std::unordered_set<std::string> kProblemKeys = {
    "id",      "subject", "question",          "answer_kind",
    "options", "gold",    "human_explanation", "source_tag"};

std::string require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw DatasetError(std::string("missing key \"") + key + "\"");
  }
  if (!it->is_string()) {
    throw DatasetError(std::string("key \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

GoldAnswer gold_from_json(const json& g) {
  if (!g.is_object() || g.size() != 1) {
    throw DatasetError("gold must be an object with exactly one key");
  }
  if (auto it = g.find("labels"); it != g.end()) {
    if (!it->is_array()) throw DatasetError("gold.labels must be an array");
    LabelSet labels;
    for (const auto& l : *it) {
      if (!l.is_string() || l.get<std::string>().size() != 1) {
        throw DatasetError("gold.labels entries must be single letters");
      }
      labels.insert(l.get<std::string>()[0]);
    }
    return GoldAnswer{labels};
  }
  if (auto it = g.find("integer"); it != g.end()) {
    if (!it->is_number_integer()) {
      throw DatasetError("gold.integer must be an integer");
    }
    return GoldAnswer{it->get<std::int64_t>()};
  }
  if (auto it = g.find("numeric"); it != g.end()) {
    if (!it->is_number()) throw DatasetError("gold.numeric must be a number");
    return GoldAnswer{it->get<double>()};
  }
  throw DatasetError("gold must contain one of labels, integer, numeric");
}

}  // namespace

Problem problem_from_json(const json& j) {
  if (!j.is_object()) throw DatasetError("problem must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kProblemKeys.contains(key)) {
      throw DatasetError("unknown key \"" + key + "\"");
    }
  }
  Problem p;
  p.id = require_string(j, "id");
  try {
    p.subject = to_lower(require_string(j, "subject"));
    p.question_text = require_string(j, "question");
    std::string kind = require_string(j, "answer_kind");
    auto parsed = parse_answer_kind(kind);
    if (!parsed) throw DatasetError("unknown answer_kind \"" + kind + "\"");
    p.answer_kind = *parsed;
    if (auto it = j.find("options"); it != j.end() && !it->is_null()) {
      if (!it->is_array()) throw DatasetError("options must be an array");
      for (const auto& o : *it) {
        if (!o.is_object() || o.size() != 2 || !o.contains("label") ||
            !o.contains("text")) {
          throw DatasetError("options entries must be {label, text}");
        }
        std::string label = require_string(o, "label");
        if (label.size() != 1 || label[0] < 'A' || label[0] > 'Z') {
          throw DatasetError("option label must be one uppercase letter");
        }
        p.options.push_back({label[0], require_string(o, "text")});
      }
    }
    auto gold = j.find("gold");
    if (gold == j.end()) throw DatasetError("missing key \"gold\"");
    p.gold = gold_from_json(*gold);
    if (auto it = j.find("human_explanation"); it != j.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw DatasetError("human_explanation must be a string or null");
      }
      p.human_explanation = it->get<std::string>();
    }
    p.source_tag = require_string(j, "source_tag");
  } catch (const DatasetError& e) {
    throw DatasetError("problem \"" + p.id + "\": " + e.what());
  }
  auto violations = validate(p);
  if (!violations.empty()) {
    throw DatasetError("problem \"" + p.id + "\": " + violations.front());
  }
  return p;
}

json gold_to_json(const GoldAnswer& gold) {
  if (const auto* labels = gold.labels()) {
    json arr = json::array();
    for (char l : *labels) arr.push_back(std::string(1, l));
    return {{"labels", arr}};
  }
  if (const auto* i = gold.integer()) return {{"integer", *i}};
  return {{"numeric", *gold.numeric()}};
}

json to_json(const Problem& p) {
  json options = json::array();
  for (const auto& o : p.options) {
    options.push_back({{"label", std::string(1, o.label)}, {"text", o.text}});
  }
  return {
      {"id", p.id},
      {"subject", p.subject},
      {"question", p.question_text},
      {"answer_kind", to_string(p.answer_kind)},
      {"options", options},
      {"gold", gold_to_json(p.gold)},
      {"human_explanation",
       p.human_explanation ? json(*p.human_explanation) : json(nullptr)},
      {"source_tag", p.source_tag},
  };
}

LoadedProblems load_problems(const std::filesystem::path& path,
                             std::string_view expected_source) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  LoadedProblems out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw DatasetError(path.string() + ": line " + std::to_string(line_no) +
                         ": JSON parse error: " + e.what());
    }
    Problem p;
    try {
      p = problem_from_json(j);
    } catch (const DatasetError& e) {
      throw DatasetError(path.string() + ": line " + std::to_string(line_no) +
                         ": " + e.what());
    }
    if (!seen.insert(p.id).second) {
      throw DatasetError(path.string() + ": line " + std::to_string(line_no) +
                         ": duplicate problem id \"" + p.id + "\"");
    }
    if (!expected_source.empty() && p.source_tag != expected_source) {
      out.warnings.push_back("problem \"" + p.id + "\": source_tag \"" +
                             p.source_tag + "\" differs from expected \"" +
                             std::string(expected_source) + "\"");
    }
    out.problems.push_back(std::move(p));
  }
  return out;
}

void write_problems(const std::filesystem::path& path,
                    std::span<const Problem> problems) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& p : problems) out << to_json(p).dump() << '\n';
}

std::size_t gold_position(const Problem& p) {
  if (p.answer_kind != AnswerKind::single_mcq) {
    throw PreconditionError("gold_position requires a single_mcq problem");
  }
  char gold = *p.gold.labels()->begin();
  for (std::size_t i = 0; i < p.options.size(); ++i) {
    if (p.options[i].label == gold) return i + 1;
  }
  throw PreconditionError("gold label not among options");
}

Problem permute_options(const Problem& p, std::size_t gold_pos) {
  if (p.answer_kind != AnswerKind::single_mcq) {
    throw PreconditionError("permute_options requires a single_mcq problem, "
                            "got " + std::string(to_string(p.answer_kind)));
  }
  if (gold_pos < 1 || gold_pos > p.options.size()) {
    throw PreconditionError("gold_position " + std::to_string(gold_pos) +
                            " out of range 1.." +
                            std::to_string(p.options.size()));
  }
  std::size_t current = gold_position(p) - 1;
  std::vector<std::string> texts;
  texts.reserve(p.options.size());
  for (std::size_t i = 0; i < p.options.size(); ++i) {
    if (i != current) texts.push_back(p.options[i].text);
  }
  texts.insert(texts.begin() + static_cast<std::ptrdiff_t>(gold_pos - 1),
               p.options[current].text);

  Problem out = p;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.options[i] = {static_cast<char>('A' + i), std::move(texts[i])};
  }
  out.gold = GoldAnswer{LabelSet{static_cast<char>('A' + gold_pos - 1)}};
  return out;
}

}  // namespace sot
