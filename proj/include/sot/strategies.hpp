#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "sot/datasets.hpp"
#include "sot/llm.hpp"
#include "sot/prompts.hpp"

namespace sot {

struct ZeroShot {
  bool operator==(const ZeroShot&) const = default;
};
struct ZeroShotCot {
  bool operator==(const ZeroShotCot&) const = default;
};
struct KnowledgeIdentification {
  bool operator==(const KnowledgeIdentification&) const = default;
};
struct StoryOfThought {
  std::vector<NarrativeTechnique> techniques{std::begin(kAllTechniques),
                                             std::end(kAllTechniques)};
  // When set, clarification and narration run on this model instead of the
  // solver.
  std::optional<std::string> narrator_model;
  bool operator==(const StoryOfThought&) const = default;
};
struct AnalogicalReasoning {
  int n_exemplars = 3;
  bool operator==(const AnalogicalReasoning&) const = default;
};

using StrategySpec = std::variant<ZeroShot, ZeroShotCot, KnowledgeIdentification,
                                  StoryOfThought, AnalogicalReasoning>;

std::string strategy_name(const StrategySpec& spec);
nlohmann::json to_json(const StrategySpec& spec);
// {"kind": "...", ...}; throws ConfigError.
StrategySpec strategy_from_json(const nlohmann::json& j);
// Expected number of completion calls per problem.
std::size_t step_count(const StrategySpec& spec);

struct StepRecord {
  std::string step_name;
  CompletionRequest request;
  CompletionResult result;
};

struct StrategyTrace {
  std::string problem_id;
  std::string strategy_name;
  std::vector<StepRecord> steps;
  std::string final_text;
};

nlohmann::json to_json(const StrategyTrace& trace);
StrategyTrace trace_from_json(const nlohmann::json& j);

struct ModelEndpoint {
  ChatProvider* provider = nullptr;
  std::string model_id;
};

struct GenerationParams {
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
};

// Provider failure in the middle of a pipeline. Carries the steps that did
// complete so they can be persisted.
class StrategyAborted : public std::runtime_error {
 public:
  StrategyAborted(const std::string& what, StrategyTrace partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const StrategyTrace& partial() const { return partial_; }

 private:
  StrategyTrace partial_;
};

// Runs one strategy on one problem. Steps execute sequentially, each as a
// fresh single-turn request. `narrator` is required iff the spec names a
// narrator model, and its model_id must match.
StrategyTrace run_strategy(const Problem& p, const StrategySpec& spec,
                           const ModelEndpoint& solver,
                           const std::optional<ModelEndpoint>& narrator,
                           const ResponseCache* cache,
                           const GenerationParams& params = {});

}  // namespace sot
