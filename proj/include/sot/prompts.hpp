#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sot/datasets.hpp"
#include "sot/llm.hpp"

namespace sot {

enum class NarrativeTechnique {
  progressive_disclosure,
  branching,
  analogy,
  analogical_reasoning,
  metaphor,
};

// The canonical full set, in canonical order.
inline constexpr NarrativeTechnique kAllTechniques[] = {
    NarrativeTechnique::progressive_disclosure,
    NarrativeTechnique::branching,
    NarrativeTechnique::analogy,
    NarrativeTechnique::analogical_reasoning,
    NarrativeTechnique::metaphor,
};

std::string_view display_name(NarrativeTechnique t);  // "Progressive Disclosure"
std::string_view short_code(NarrativeTechnique t);    // "PD"
std::string_view to_string(NarrativeTechnique t);     // "progressive_disclosure"
std::optional<NarrativeTechnique> parse_technique(std::string_view s);

// Versioned text asset with {placeholder} slots.
struct PromptTemplate {
  std::string_view name;
  std::string_view version;
  std::string_view text;
};

namespace templates {
extern const PromptTemplate kClarify;
extern const PromptTemplate kNarrate;
extern const PromptTemplate kSolveNarrative;
extern const PromptTemplate kSolveKnowledge;
extern const PromptTemplate kSolveDirect;
extern const PromptTemplate kAnalogical;
extern const PromptTemplate kAnnotate;            // verbatim annotation prompt
extern const PromptTemplate kAnnotateWithFormat;  // + "Technique: count" request
}  // namespace templates

std::span<const PromptTemplate* const> all_templates();

// Single-pass substitution of {name} slots; unknown slots are left intact and
// substituted values are never rescanned.
std::string render_template(std::string_view text,
                            const std::map<std::string, std::string>& values);

inline constexpr std::string_view kAnswerFooter =
    "End with: Answer: <letter(s) or number>";
inline constexpr std::string_view kNumericInstruction =
    "Give the final answer as a single number on the last line.";
inline constexpr std::string_view kCotTrigger = "Let's think step by step.";

// "Options:\nA) ...\nB) ..." for MCQ problems, kNumericInstruction otherwise.
std::string render_options_block(const Problem& p);

// "Progressive Disclosure, Branching, ..., and Metaphor" in canonical order.
std::string render_technique_list(std::span<const NarrativeTechnique> techniques);

enum class ContextKind { narrative, knowledge, none };

std::vector<ChatMessage> build_clarification_prompt(const Problem& p);
std::vector<ChatMessage> build_narrative_prompt(
    const Problem& p, std::string_view clarification,
    std::span<const NarrativeTechnique> techniques);
std::vector<ChatMessage> build_solving_prompt(const Problem& p,
                                              std::string_view context,
                                              ContextKind kind);
std::vector<ChatMessage> build_cot_prompt(const Problem& p);
std::vector<ChatMessage> build_analogical_prompt(const Problem& p,
                                                 int n_exemplars);

enum class AnnotationFormat { verbatim, with_count_lines };
std::vector<ChatMessage> build_annotation_prompt(
    std::string_view narrative,
    AnnotationFormat format = AnnotationFormat::with_count_lines);

}  // namespace sot
