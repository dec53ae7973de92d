#include "sot/strategies.hpp"

#include <algorithm>

#include "sot/errors.hpp"

namespace sot {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

std::string strategy_name(const StrategySpec& spec) {
  return std::visit(
      Overloaded{
          [](const ZeroShot&) { return std::string("zero_shot"); },
          [](const ZeroShotCot&) { return std::string("zero_shot_cot"); },
          [](const KnowledgeIdentification&) {
            return std::string("knowledge_identification");
          },
          [](const StoryOfThought&) { return std::string("story_of_thought"); },
          [](const AnalogicalReasoning&) {
            return std::string("analogical_reasoning");
          },
      },
      spec);
}

std::size_t step_count(const StrategySpec& spec) {
  if (std::holds_alternative<KnowledgeIdentification>(spec)) return 2;
  if (std::holds_alternative<StoryOfThought>(spec)) return 3;
  return 1;
}

json to_json(const StrategySpec& spec) {
  json j = {{"kind", strategy_name(spec)}};
  if (const auto* sot = std::get_if<StoryOfThought>(&spec)) {
    json techniques = json::array();
    for (auto t : sot->techniques) techniques.push_back(to_string(t));
    j["techniques"] = techniques;
    if (sot->narrator_model) j["narrator_model"] = *sot->narrator_model;
  } else if (const auto* ar = std::get_if<AnalogicalReasoning>(&spec)) {
    j["n_exemplars"] = ar->n_exemplars;
  }
  return j;
}

StrategySpec strategy_from_json(const json& j) {
  if (j.is_string()) return strategy_from_json(json{{"kind", j}});
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ConfigError("strategy must be an object with a string \"kind\"");
  }
  const std::string kind = j["kind"].get<std::string>();
  auto reject_extra = [&](std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, _] : j.items()) {
      if (key != "kind" &&
          std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("strategy " + kind + ": unknown key \"" + key + "\"");
      }
    }
  };
  if (kind == "zero_shot") {
    reject_extra({});
    return ZeroShot{};
  }
  if (kind == "zero_shot_cot") {
    reject_extra({});
    return ZeroShotCot{};
  }
  if (kind == "knowledge_identification") {
    reject_extra({});
    return KnowledgeIdentification{};
  }
  if (kind == "story_of_thought") {
    reject_extra({"techniques", "narrator_model"});
    StoryOfThought sot;
    if (auto it = j.find("techniques"); it != j.end()) {
      sot.techniques.clear();
      for (const auto& t : *it) {
        auto parsed = t.is_string() ? parse_technique(t.get<std::string>())
                                    : std::nullopt;
        if (!parsed) throw ConfigError("unknown narrative technique " + t.dump());
        if (std::find(sot.techniques.begin(), sot.techniques.end(), *parsed) ==
            sot.techniques.end()) {
          sot.techniques.push_back(*parsed);
        }
      }
      if (sot.techniques.empty()) {
        throw ConfigError("story_of_thought needs at least one technique");
      }
    }
    if (auto it = j.find("narrator_model"); it != j.end() && !it->is_null()) {
      sot.narrator_model = it->get<std::string>();
    }
    return sot;
  }
  if (kind == "analogical_reasoning") {
    reject_extra({"n_exemplars"});
    AnalogicalReasoning ar;
    ar.n_exemplars = j.value("n_exemplars", 3);
    if (ar.n_exemplars < 1) throw ConfigError("n_exemplars must be >= 1");
    return ar;
  }
  throw ConfigError("unknown strategy kind \"" + kind + "\"");
}

json to_json(const StrategyTrace& trace) {
  json steps = json::array();
  for (const auto& s : trace.steps) {
    steps.push_back({{"step_name", s.step_name},
                     {"request", to_json(s.request)},
                     {"result", to_json(s.result)}});
  }
  return {{"problem_id", trace.problem_id},
          {"strategy_name", trace.strategy_name},
          {"steps", steps},
          {"final_text", trace.final_text}};
}

StrategyTrace trace_from_json(const json& j) {
  StrategyTrace t;
  t.problem_id = j.at("problem_id").get<std::string>();
  t.strategy_name = j.at("strategy_name").get<std::string>();
  for (const auto& s : j.at("steps")) {
    t.steps.push_back({s.at("step_name").get<std::string>(),
                       request_from_json(s.at("request")),
                       result_from_json(s.at("result"))});
  }
  t.final_text = j.at("final_text").get<std::string>();
  return t;
}

namespace {

class TraceBuilder {
 public:
  TraceBuilder(const Problem& p, const StrategySpec& spec,
               const ResponseCache* cache, const GenerationParams& params)
      : cache_(cache), params_(params) {
    trace_.problem_id = p.id;
    trace_.strategy_name = strategy_name(spec);
  }

  const std::string& step(const std::string& name, const ModelEndpoint& model,
                          std::vector<ChatMessage> messages) {
    CompletionRequest req{model.model_id, std::move(messages),
                          params_.temperature, params_.max_tokens};
    try {
      CompletionResult res = cached_complete(req, *model.provider, cache_);
      trace_.steps.push_back({name, std::move(req), std::move(res)});
    } catch (const std::exception& e) {
      trace_.final_text = trace_.steps.empty() ? std::string()
                                               : trace_.steps.back().result.text;
      throw StrategyAborted("step \"" + name + "\" failed: " + e.what(),
                            trace_);
    }
    return trace_.steps.back().result.text;
  }

  StrategyTrace partial() const {
    StrategyTrace t = trace_;
    if (!t.steps.empty()) t.final_text = t.steps.back().result.text;
    return t;
  }

  StrategyTrace finish() {
    trace_.final_text = trace_.steps.back().result.text;
    return std::move(trace_);
  }

 private:
  const ResponseCache* cache_;
  GenerationParams params_;
  StrategyTrace trace_;
};

}  // namespace

StrategyTrace run_strategy(const Problem& p, const StrategySpec& spec,
                           const ModelEndpoint& solver,
                           const std::optional<ModelEndpoint>& narrator,
                           const ResponseCache* cache,
                           const GenerationParams& params) {
  if (solver.provider == nullptr) throw PreconditionError("solver has no provider");
  const auto* sot = std::get_if<StoryOfThought>(&spec);
  const bool wants_narrator = sot != nullptr && sot->narrator_model.has_value();
  if (wants_narrator) {
    if (!narrator || narrator->provider == nullptr) {
      throw PreconditionError("strategy names a narrator model but no narrator "
                              "endpoint was given");
    }
    if (narrator->model_id != *sot->narrator_model) {
      throw PreconditionError("narrator endpoint model \"" + narrator->model_id +
                              "\" differs from spec \"" + *sot->narrator_model +
                              "\"");
    }
  }

  TraceBuilder tb(p, spec, cache, params);
  try {
    std::visit(
        Overloaded{
            [&](const ZeroShot&) {
              tb.step("solve", solver,
                      build_solving_prompt(p, {}, ContextKind::none));
            },
            [&](const ZeroShotCot&) {
              tb.step("solve", solver, build_cot_prompt(p));
            },
            [&](const KnowledgeIdentification&) {
              std::string knowledge =
                  tb.step("clarify", solver, build_clarification_prompt(p));
              tb.step("solve", solver,
                      build_solving_prompt(p, knowledge, ContextKind::knowledge));
            },
            [&](const StoryOfThought& s) {
              const ModelEndpoint& story_model = wants_narrator ? *narrator : solver;
              std::string clarification =
                  tb.step("clarify", story_model, build_clarification_prompt(p));
              std::string narrative =
                  tb.step("narrate", story_model,
                          build_narrative_prompt(p, clarification, s.techniques));
              tb.step("solve", solver,
                      build_solving_prompt(p, narrative, ContextKind::narrative));
            },
            [&](const AnalogicalReasoning& a) {
              tb.step("solve", solver, build_analogical_prompt(p, a.n_exemplars));
            },
        },
        spec);
  } catch (const PreconditionError& e) {
    // An earlier step returned text the next prompt cannot use (e.g. empty).
    throw StrategyAborted(e.what(), tb.partial());
  }
  return tb.finish();
}

}  // namespace sot
