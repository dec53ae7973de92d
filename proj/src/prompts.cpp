#include "sot/prompts.hpp"

#include <algorithm>

#include "sot/errors.hpp"
#include "sot/text.hpp"

namespace sot {

std::string_view display_name(NarrativeTechnique t) {
  switch (t) {
    case NarrativeTechnique::progressive_disclosure: return "Progressive Disclosure";
    case NarrativeTechnique::branching: return "Branching";
    case NarrativeTechnique::analogy: return "Analogy";
    case NarrativeTechnique::analogical_reasoning: return "Analogical Reasoning";
    case NarrativeTechnique::metaphor: return "Metaphor";
  }
  return "";
}

std::string_view short_code(NarrativeTechnique t) {
  switch (t) {
    case NarrativeTechnique::progressive_disclosure: return "PD";
    case NarrativeTechnique::branching: return "BR";
    case NarrativeTechnique::analogy: return "AN";
    case NarrativeTechnique::analogical_reasoning: return "AR";
    case NarrativeTechnique::metaphor: return "ME";
  }
  return "";
}

std::string_view to_string(NarrativeTechnique t) {
  switch (t) {
    case NarrativeTechnique::progressive_disclosure: return "progressive_disclosure";
    case NarrativeTechnique::branching: return "branching";
    case NarrativeTechnique::analogy: return "analogy";
    case NarrativeTechnique::analogical_reasoning: return "analogical_reasoning";
    case NarrativeTechnique::metaphor: return "metaphor";
  }
  return "";
}

std::optional<NarrativeTechnique> parse_technique(std::string_view s) {
  for (auto t : kAllTechniques) {
    if (s == to_string(t) || s == short_code(t) || iequals(s, display_name(t))) {
      return t;
    }
  }
  return std::nullopt;
}

namespace templates {

const PromptTemplate kClarify{
    "clarify", "1",
    "You are an explorer who wants to identify and collect different related "
    "and specialized subject areas to clarify the question. Your goal is to "
    "narrow down the question and provide relevant areas of knowledge and "
    "experience you have that help clarify the question mentioned below. You "
    "should not answer the question.\n"
    "\n"
    "{question}"};

const PromptTemplate kNarrate{
    "narrate", "1",
    "You are an expert in narrative-based explanations for science "
    "communication. Your goal is to clarify the following question in a "
    "narrative way through the interconnected information provided below to "
    "enable a non-expert to comprehend the question in a more coherent and "
    "contextually rich manner. You should not answer the question.\n"
    "\n"
    "{techniques}\n"
    "\n"
    "{question}\n"
    "\n"
    "{step1}"};

const PromptTemplate kSolveNarrative{
    "solve_narrative", "1",
    "You are an expert in analyzing narrative-based explanations for solving "
    "tasks. Please answer the following question based on the following "
    "narrative-based clarification:\n"
    "\n"
    "{question}\n"
    "\n"
    "{options}\n"
    "\n"
    "{narrative}\n"
    "\n"
    "End with: Answer: <letter(s) or number>"};

const PromptTemplate kSolveKnowledge{
    "solve_knowledge", "1",
    "You are an expert in analyzing narrative-based explanations for solving "
    "tasks. Please answer the following question based on the following "
    "conceptual knowledge:\n"
    "\n"
    "{question}\n"
    "\n"
    "{options}\n"
    "\n"
    "{step1}\n"
    "\n"
    "End with: Answer: <letter(s) or number>"};

const PromptTemplate kSolveDirect{
    "solve_direct", "1",
    "{question}\n"
    "\n"
    "{options}\n"
    "\n"
    "End with: Answer: <letter(s) or number>"};

const PromptTemplate kAnalogical{
    "analogical", "1",
    "Your task is to tackle the following problem.\n"
    "\n"
    "{question}\n"
    "\n"
    "{options}\n"
    "\n"
    "Instructions:\n"
    "1. Relevant problems: recall {n_exemplars} relevant and distinct "
    "problems. For each problem, describe it and explain its solution.\n"
    "2. Solve the initial problem: using the insights from those problems, "
    "solve the initial problem step by step.\n"
    "\n"
    "End with: Answer: <letter(s) or number>"};

const PromptTemplate kAnnotate{
    "annotate", "1",
    "You are an expert in analyzing narrative-based explanations for science "
    "communication. Your goal is to find out which narrative techniques have "
    "been used in the following narrative-based explanation.\n"
    "\n"
    "Label the narrative-based explanation using the following "
    "narrative-based techniques:\n"
    "1. Progressive Disclosure\n"
    "2. Branching\n"
    "3. Analogy\n"
    "4. Analogical Reasoning\n"
    "5. Metaphor\n"
    "\n"
    "{narrative}"};

const PromptTemplate kAnnotateWithFormat{
    "annotate", "2",
    "You are an expert in analyzing narrative-based explanations for science "
    "communication. Your goal is to find out which narrative techniques have "
    "been used in the following narrative-based explanation.\n"
    "\n"
    "Label the narrative-based explanation using the following "
    "narrative-based techniques:\n"
    "1. Progressive Disclosure\n"
    "2. Branching\n"
    "3. Analogy\n"
    "4. Analogical Reasoning\n"
    "5. Metaphor\n"
    "\n"
    "After labeling, report the number of occurrences of each technique on "
    "its own line in the form \"Technique: count\".\n"
    "\n"
    "{narrative}"};

}  // namespace templates

std::span<const PromptTemplate* const> all_templates() {
  static const PromptTemplate* const kAll[] = {
      &templates::kClarify,        &templates::kNarrate,
      &templates::kSolveNarrative, &templates::kSolveKnowledge,
      &templates::kSolveDirect,    &templates::kAnalogical,
      &templates::kAnnotate,       &templates::kAnnotateWithFormat,
  };
  return kAll;
}

std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size() * 2);
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        auto it = values.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

std::string render_options_block(const Problem& p) {
  if (!is_mcq(p.answer_kind) || p.options.empty()) {
    return std::string(kNumericInstruction);
  }
  std::string block = "Options:";
  for (const auto& o : p.options) {
    block += '\n';
    block += o.label;
    block += ") ";
    block += o.text;
  }
  return block;
}

namespace {

std::vector<NarrativeTechnique> canonical_subset(
    std::span<const NarrativeTechnique> techniques) {
  std::vector<NarrativeTechnique> out;
  for (auto t : kAllTechniques) {
    if (std::find(techniques.begin(), techniques.end(), t) != techniques.end()) {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<ChatMessage> user_message(std::string content) {
  return {ChatMessage{Role::user, std::move(content)}};
}

std::string number_word(int n) {
  static constexpr std::string_view kWords[] = {
      "zero", "one", "two",   "three", "four", "five",
      "six",  "seven", "eight", "nine", "ten"};
  if (n >= 0 && n <= 10) return std::string(kWords[n]);
  return std::to_string(n);
}

}  // namespace

std::string render_technique_list(
    std::span<const NarrativeTechnique> techniques) {
  auto ordered = canonical_subset(techniques);
  std::string out;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0) {
      if (ordered.size() == 2) {
        out += " and ";
      } else {
        out += (i + 1 == ordered.size()) ? ", and " : ", ";
      }
    }
    out += display_name(ordered[i]);
  }
  return out;
}

std::vector<ChatMessage> build_clarification_prompt(const Problem& p) {
  return user_message(
      render_template(templates::kClarify.text, {{"question", p.question_text}}));
}

std::vector<ChatMessage> build_narrative_prompt(
    const Problem& p, std::string_view clarification,
    std::span<const NarrativeTechnique> techniques) {
  if (trim(clarification).empty()) {
    throw PreconditionError("narrative prompt needs a non-empty clarification");
  }
  auto ordered = canonical_subset(techniques);
  if (ordered.empty()) {
    throw PreconditionError("narrative prompt needs at least one technique");
  }
  std::string sentence =
      ordered.size() == 1
          ? "Make sure to use this narrative technique when clarifying the "
            "question through the interconnected information: "
          : "Make sure to use all of these narrative techniques when "
            "clarifying the question through the interconnected information: ";
  sentence += render_technique_list(ordered);
  sentence += '.';
  return user_message(render_template(templates::kNarrate.text,
                                      {{"techniques", sentence},
                                       {"question", p.question_text},
                                       {"step1", std::string(clarification)}}));
}

std::vector<ChatMessage> build_solving_prompt(const Problem& p,
                                              std::string_view context,
                                              ContextKind kind) {
  if (kind != ContextKind::none && trim(context).empty()) {
    throw PreconditionError("solving prompt needs non-empty context");
  }
  const std::string options = render_options_block(p);
  switch (kind) {
    case ContextKind::narrative:
      return user_message(render_template(
          templates::kSolveNarrative.text,
          {{"question", p.question_text},
           {"options", options},
           {"narrative", std::string(context)}}));
    case ContextKind::knowledge:
      return user_message(render_template(templates::kSolveKnowledge.text,
                                          {{"question", p.question_text},
                                           {"options", options},
                                           {"step1", std::string(context)}}));
    case ContextKind::none:
      break;
  }
  return user_message(render_template(
      templates::kSolveDirect.text,
      {{"question", p.question_text}, {"options", options}}));
}

std::vector<ChatMessage> build_cot_prompt(const Problem& p) {
  auto messages = build_solving_prompt(p, {}, ContextKind::none);
  messages.back().content += '\n';
  messages.back().content += kCotTrigger;
  return messages;
}

std::vector<ChatMessage> build_analogical_prompt(const Problem& p,
                                                 int n_exemplars) {
  if (n_exemplars < 1) throw PreconditionError("n_exemplars must be >= 1");
  return user_message(render_template(
      templates::kAnalogical.text,
      {{"question", p.question_text},
       {"options", render_options_block(p)},
       {"n_exemplars", number_word(n_exemplars)}}));
}

std::vector<ChatMessage> build_annotation_prompt(std::string_view narrative,
                                                 AnnotationFormat format) {
  if (trim(narrative).empty()) {
    throw PreconditionError("annotation prompt needs a non-empty narrative");
  }
  const auto& tmpl = format == AnnotationFormat::verbatim
                         ? templates::kAnnotate
                         : templates::kAnnotateWithFormat;
  return user_message(
      render_template(tmpl.text, {{"narrative", std::string(narrative)}}));
}

}  // namespace sot
