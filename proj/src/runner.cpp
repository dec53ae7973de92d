#include "sot/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "sot/errors.hpp"
#include "sot/hashing.hpp"
#include "sot/prompts.hpp"
#include "sot/text.hpp"

namespace sot {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Write-then-rename so readers never see a partial file.
void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

ModelRef model_ref_from_json(const json& j, const char* field) {
  if (!j.is_object()) throw ConfigError(std::string(field) + ": expected an object");
  for (const auto& [k, v] : j.items()) {
    if (k != "model_id" && k != "provider_id") {
      throw ConfigError(std::string(field) + ": unknown key \"" + k + "\"");
    }
  }
  ModelRef ref;
  try {
    ref.model_id = j.at("model_id").get<std::string>();
    ref.provider_id = j.at("provider_id").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(field) + ": " + e.what());
  }
  if (ref.model_id.empty() || ref.provider_id.empty()) {
    throw ConfigError(std::string(field) + ": model_id and provider_id must be non-empty");
  }
  return ref;
}

json to_json(const ModelRef& r) {
  return {{"model_id", r.model_id}, {"provider_id", r.provider_id}};
}

bool valid_run_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
           c == '.';
  });
}

const std::set<std::string> kManifestKeys = {
    "run_id",      "dataset_path",  "strategy",       "solver_model",
    "narrator_model", "gold_position", "scoring",     "concurrency",
    "seed",        "temperature",   "max_tokens",     "output_dir",
    "cache_dir",   "providers",     "numeric_tolerance", "multi_correct_rule"};

}  // namespace

RunManifest manifest_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("manifest: expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kManifestKeys.contains(k)) {
      throw ConfigError("manifest: unknown key \"" + k + "\"");
    }
  }
  for (const char* k : {"run_id", "dataset_path", "strategy", "solver_model",
                        "scoring", "output_dir", "cache_dir"}) {
    if (!j.contains(k)) throw ConfigError(std::string("manifest: missing \"") + k + "\"");
  }

  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.dataset_path = j.at("dataset_path").get<std::string>();
    m.output_dir = j.at("output_dir").get<std::string>();
    m.cache_dir = j.at("cache_dir").get<std::string>();
    m.concurrency = j.value("concurrency", 1);
    m.seed = j.value("seed", std::uint64_t{0});
    m.temperature = j.value("temperature", kDefaultTemperature);
    m.max_tokens = j.value("max_tokens", kDefaultMaxTokens);
    if (j.contains("gold_position") && !j.at("gold_position").is_null()) {
      m.gold_position = j.at("gold_position").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  if (!valid_run_id(m.run_id)) {
    throw ConfigError("manifest: run_id must be non-empty and use only "
                      "letters, digits, '-', '_' or '.'");
  }
  if (m.concurrency < 1) throw ConfigError("manifest: concurrency must be >= 1");
  if (m.max_tokens < 1) throw ConfigError("manifest: max_tokens must be >= 1");
  if (!(m.temperature >= 0.0 && m.temperature <= 2.0)) {
    throw ConfigError("manifest: temperature must lie in [0, 2]");
  }
  if (m.gold_position && *m.gold_position < 1) {
    throw ConfigError("manifest: gold_position is 1-based");
  }

  m.strategy = strategy_from_json(j.at("strategy"));
  m.solver_model = model_ref_from_json(j.at("solver_model"), "solver_model");
  if (j.contains("narrator_model") && !j.at("narrator_model").is_null()) {
    m.narrator_model = model_ref_from_json(j.at("narrator_model"), "narrator_model");
  }
  auto* sot = std::get_if<StoryOfThought>(&m.strategy);
  if (m.narrator_model) {
    if (sot == nullptr) {
      throw ConfigError("manifest: narrator_model requires the story_of_thought strategy");
    }
    if (sot->narrator_model && *sot->narrator_model != m.narrator_model->model_id) {
      throw ConfigError("manifest: strategy narrator_model differs from narrator_model");
    }
    sot->narrator_model = m.narrator_model->model_id;
  } else if (sot != nullptr && sot->narrator_model) {
    throw ConfigError("manifest: strategy names a narrator model; add a "
                      "narrator_model entry with its provider_id");
  }

  if (!j.at("scoring").is_string()) throw ConfigError("manifest: scoring must be a string");
  const std::string scoring = j.at("scoring").get<std::string>();
  if (scoring == "gpqa") {
    m.scoring = ScoringPolicy::gpqa();
  } else if (scoring == "jeebench") {
    m.scoring = ScoringPolicy::jeebench();
  } else {
    throw ConfigError("manifest: scoring must be \"gpqa\" or \"jeebench\"");
  }
  if (j.contains("numeric_tolerance")) {
    if (!j.at("numeric_tolerance").is_number()) {
      throw ConfigError("manifest: numeric_tolerance must be a number");
    }
    m.scoring.numeric_tolerance = j.at("numeric_tolerance").get<double>();
    if (!(m.scoring.numeric_tolerance >= 0.0)) {
      throw ConfigError("manifest: numeric_tolerance must be >= 0");
    }
  }
  if (j.contains("multi_correct_rule")) {
    const std::string rule = j.at("multi_correct_rule").is_string()
                                 ? j.at("multi_correct_rule").get<std::string>()
                                 : std::string();
    if (rule == "partial_credit") {
      m.scoring.multi_rule = MultiCorrectRule::partial_credit;
    } else if (rule == "all_or_nothing") {
      m.scoring.multi_rule = MultiCorrectRule::all_or_nothing;
    } else {
      throw ConfigError("manifest: multi_correct_rule must be \"partial_credit\" "
                        "or \"all_or_nothing\"");
    }
  }

  if (j.contains("providers")) {
    if (!j.at("providers").is_array()) throw ConfigError("manifest: providers must be a list");
    for (const auto& pj : j.at("providers")) {
      m.providers.push_back(provider_config_from_json(pj));
    }
  }
  std::set<std::string> ids;
  for (const auto& p : m.providers) {
    if (!ids.insert(p.provider_id).second) {
      throw ConfigError("manifest: duplicate provider_id \"" + p.provider_id + "\"");
    }
  }
  return m;
}

json to_json(const RunManifest& m) {
  json j = {{"run_id", m.run_id},
            {"dataset_path", m.dataset_path.string()},
            {"strategy", to_json(m.strategy)},
            {"solver_model", to_json(m.solver_model)},
            {"narrator_model", m.narrator_model ? to_json(*m.narrator_model) : json()},
            {"gold_position", m.gold_position ? json(*m.gold_position) : json()},
            {"scoring", m.scoring.benchmark == ScoringPolicy::Benchmark::gpqa
                            ? "gpqa"
                            : "jeebench"},
            {"numeric_tolerance", m.scoring.numeric_tolerance},
            {"multi_correct_rule",
             m.scoring.multi_rule == MultiCorrectRule::partial_credit
                 ? "partial_credit"
                 : "all_or_nothing"},
            {"concurrency", m.concurrency},
            {"seed", m.seed},
            {"temperature", m.temperature},
            {"max_tokens", m.max_tokens},
            {"output_dir", m.output_dir.string()},
            {"cache_dir", m.cache_dir.string()},
            {"providers", json::array()}};
  for (const auto& p : m.providers) j["providers"].push_back(to_json(p));
  return j;
}

RunManifest load_manifest(const fs::path& path) {
  return manifest_from_json(parse_json_file(path));
}

json to_json(const RunRecord& r) {
  return {{"problem_id", r.problem_id},
          {"trace", to_json(r.trace)},
          {"predicted", to_json(r.predicted)},
          {"score", {{"score", r.score.score}, {"solved", r.score.solved}}},
          {"tokens", {{"prompt", r.prompt_tokens}, {"completion", r.completion_tokens}}},
          {"cost_estimate", r.cost_estimate},
          {"failed", r.failed},
          {"error", r.error}};
}

RunRecord record_from_json(const json& j) {
  RunRecord r;
  r.problem_id = j.at("problem_id").get<std::string>();
  r.trace = trace_from_json(j.at("trace"));
  r.predicted = predicted_from_json(j.at("predicted"));
  r.score.problem_id = r.problem_id;
  r.score.score = j.at("score").at("score").get<double>();
  r.score.solved = j.at("score").at("solved").get<bool>();
  r.prompt_tokens = j.at("tokens").at("prompt").get<std::int64_t>();
  r.completion_tokens = j.at("tokens").at("completion").get<std::int64_t>();
  r.cost_estimate = j.at("cost_estimate").get<double>();
  r.failed = j.at("failed").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

std::vector<RunRecord> read_records(const fs::path& path) {
  std::vector<RunRecord> out;
  if (!fs::exists(path)) return out;
  const std::string content = read_file(path);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    std::size_t nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : content.size();
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (!terminated) break;
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::shared_ptr<ProviderRegistry> build_registry(const RunManifest& m) {
  auto registry = std::make_shared<ProviderRegistry>();
  std::vector<std::string> wanted = {m.solver_model.provider_id};
  if (m.narrator_model) wanted.push_back(m.narrator_model->provider_id);
  for (const auto& id : wanted) {
    if (registry->contains(id)) continue;
    auto it = std::find_if(m.providers.begin(), m.providers.end(),
                           [&](const ProviderConfig& c) { return c.provider_id == id; });
    if (it == m.providers.end()) {
      throw ConfigError("manifest: no provider configured with provider_id \"" + id + "\"");
    }
    try {
      registry->add(make_provider(*it, m.seed));
    } catch (const ProviderError& e) {
      throw ConfigError(e.what());
    }
  }
  return registry;
}

namespace {

RunManifest resolve_paths(RunManifest m) {
  m.dataset_path = fs::absolute(m.dataset_path).lexically_normal();
  m.output_dir = fs::absolute(m.output_dir).lexically_normal();
  m.cache_dir = fs::absolute(m.cache_dir).lexically_normal();
  return m;
}

std::vector<Problem> prepared_problems(const RunManifest& m) {
  std::vector<Problem> problems = load_problems(m.dataset_path).problems;
  if (problems.empty()) throw ConfigError("dataset " + m.dataset_path.string() + " is empty");
  if (m.gold_position) {
    for (auto& p : problems) {
      if (p.answer_kind != AnswerKind::single_mcq) {
        throw ConfigError("gold_position applies only to single_mcq datasets; problem \"" +
                          p.id + "\" is " + std::string(to_string(p.answer_kind)));
      }
      if (*m.gold_position > p.options.size()) {
        throw ConfigError("gold_position " + std::to_string(*m.gold_position) +
                          " exceeds the option count of problem \"" + p.id + "\"");
      }
      p = permute_options(p, *m.gold_position);
    }
  }
  return problems;
}

const ProviderConfig& step_provider(const StepRecord& step, const RunManifest& m,
                                    const ProviderRegistry& registry) {
  const bool narrated = m.narrator_model &&
                        (step.step_name == "clarify" || step.step_name == "narrate");
  return registry.get(narrated ? m.narrator_model->provider_id
                               : m.solver_model.provider_id)
      .config();
}

void fill_accounting(RunRecord& r, const RunManifest& m,
                     const ProviderRegistry& registry) {
  for (const auto& step : r.trace.steps) {
    r.prompt_tokens += step.result.prompt_tokens;
    r.completion_tokens += step.result.completion_tokens;
    r.cost_estimate += step_provider(step, m, registry)
                           .cost(step.result.prompt_tokens, step.result.completion_tokens);
  }
}

RunRecord run_problem(const Problem& p, const RunManifest& m,
                      const ProviderRegistry& registry, const ResponseCache& cache) {
  ModelEndpoint solver{&registry.get(m.solver_model.provider_id), m.solver_model.model_id};
  std::optional<ModelEndpoint> narrator;
  if (m.narrator_model) {
    narrator = ModelEndpoint{&registry.get(m.narrator_model->provider_id),
                             m.narrator_model->model_id};
  }
  GenerationParams params{m.temperature, m.max_tokens};

  RunRecord r;
  r.problem_id = p.id;
  try {
    r.trace = run_strategy(p, m.strategy, solver, narrator, &cache, params);
    r.predicted = extract(r.trace.final_text, p);
    r.score = ProblemScore::make(p.id, score(r.predicted, p, m.scoring));
  } catch (const StrategyAborted& e) {
    r.trace = e.partial();
    r.failed = true;
    r.error = e.what();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.trace.problem_id = p.id;
    r.trace.strategy_name = strategy_name(m.strategy);
    r.failed = true;
    r.error = e.what();
  }
  if (r.failed) {
    r.predicted = PredictedAnswer{};
    r.score = ProblemScore::make(p.id, 0.0);
  }
  fill_accounting(r, m, registry);
  return r;
}

ScoreCard scorecard_for(const std::vector<Problem>& problems,
                        const std::map<std::string, RunRecord>& records) {
  std::vector<std::pair<Problem, ProblemScore>> scored;
  scored.reserve(problems.size());
  for (const auto& p : problems) scored.emplace_back(p, records.at(p.id).score);
  return aggregate(scored);
}

json templates_json() {
  json out = json::array();
  for (const PromptTemplate* t : all_templates()) {
    out.push_back({{"name", t->name},
                   {"version", t->version},
                   {"sha256", sha256_hex(t->text)}});
  }
  return out;
}

}  // namespace

RunSummary execute_run(const RunManifest& manifest, const ExecuteOptions& options) {
  const RunManifest m = resolve_paths(manifest);
  const std::vector<Problem> problems = prepared_problems(m);
  std::shared_ptr<ProviderRegistry> registry =
      options.registry ? options.registry : build_registry(m);
  registry->get(m.solver_model.provider_id);
  if (m.narrator_model) registry->get(m.narrator_model->provider_id);

  const fs::path dir = m.run_dir();
  fs::create_directories(dir);
  const json echo = to_json(m);
  const fs::path manifest_path = dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    if (parse_json_file(manifest_path) != echo) {
      throw ConfigError("run directory " + dir.string() +
                        " already holds a different manifest; choose a new run_id");
    }
  } else {
    write_file_atomic(manifest_path, echo.dump(2) + "\n");
  }

  const fs::path records_path = dir / "records.jsonl";
  std::map<std::string, RunRecord> done;
  {
    std::set<std::string> ids;
    for (const auto& p : problems) ids.insert(p.id);
    for (auto& r : read_records(records_path)) {
      if (!r.failed && ids.contains(r.problem_id)) done[r.problem_id] = std::move(r);
    }
  }
  // Drop failed and truncated lines so the append log restarts clean.
  {
    std::string kept;
    for (const auto& p : problems) {
      auto it = done.find(p.id);
      if (it != done.end()) kept += to_json(it->second).dump() + "\n";
    }
    write_file_atomic(records_path, kept);
  }

  std::vector<const Problem*> todo;
  for (const auto& p : problems) {
    if (!done.contains(p.id)) todo.push_back(&p);
  }

  RunSummary summary;
  summary.run_dir = dir;
  summary.total = problems.size();
  summary.skipped = problems.size() - todo.size();

  ResponseCache cache(m.cache_dir);
  std::mutex mu;
  std::ofstream log(records_path, std::ios::binary | std::ios::app);
  if (!log) throw std::runtime_error("cannot append to " + records_path.string());

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> claimed{0};
  std::atomic<std::size_t> in_flight{0};
  std::atomic<std::size_t> max_in_flight{0};
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      if (options.stop != nullptr && options.stop->load()) return;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (fatal) return;
      }
      if (options.max_new_records != 0 && claimed.fetch_add(1) >= options.max_new_records) {
        return;
      }
      const std::size_t i = next.fetch_add(1);
      if (i >= todo.size()) return;

      const std::size_t now = in_flight.fetch_add(1) + 1;
      std::size_t seen = max_in_flight.load();
      while (now > seen && !max_in_flight.compare_exchange_weak(seen, now)) {
      }
      try {
        RunRecord r = run_problem(*todo[i], m, *registry, cache);
        std::lock_guard<std::mutex> lock(mu);
        log << to_json(r).dump() << '\n';
        log.flush();
        done[r.problem_id] = std::move(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!fatal) fatal = std::current_exception();
      }
      in_flight.fetch_sub(1);
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(m.concurrency), todo.size());
  std::vector<std::thread> pool;
  pool.reserve(n_workers);
  for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  log.close();
  if (fatal) std::rethrow_exception(fatal);

  summary.max_in_flight = max_in_flight.load();
  summary.executed = done.size() - summary.skipped;
  for (const auto& [id, r] : done) {
    summary.total_cost += r.cost_estimate;
    if (r.failed) ++summary.failed;
  }
  summary.complete = done.size() == problems.size();
  if (!summary.complete) return summary;

  std::string ordered;
  std::int64_t new_prompt = 0;
  std::int64_t new_completion = 0;
  for (const auto& p : problems) {
    const RunRecord& r = done.at(p.id);
    ordered += to_json(r).dump() + "\n";
    for (const auto& s : r.trace.steps) {
      if (s.result.from_cache) continue;
      new_prompt += s.result.prompt_tokens;
      new_completion += s.result.completion_tokens;
    }
  }
  write_file_atomic(records_path, ordered);

  ScoreCard card = scorecard_for(problems, done);
  write_file_atomic(dir / "scorecard.json", to_json(card).dump(2) + "\n");
  write_file_atomic(dir / "scorecard.csv", to_csv(card));

  json meta = {{"manifest", echo},
               {"dataset_sha256", sha256_hex(read_file(m.dataset_path))},
               {"templates", templates_json()},
               {"scoring_policy", m.scoring.name()},
               {"n_problems", problems.size()},
               {"failures", summary.failed},
               {"total_cost", summary.total_cost},
               {"billed_tokens_this_invocation",
                {{"prompt", new_prompt}, {"completion", new_completion}}},
               {"sampling",
                {{"temperature", m.temperature},
                 {"max_tokens", m.max_tokens},
                 {"top_p", "not sent (provider default)"},
                 {"seed_scope", "mock fallback responses only"}}}};
  write_file_atomic(dir / "meta.json", meta.dump(2) + "\n");
  summary.scorecard = std::move(card);
  return summary;
}

LoadedRun load_run(const fs::path& run_dir) {
  const fs::path manifest_path = run_dir / "manifest.json";
  if (!fs::exists(manifest_path)) {
    throw ConfigError(run_dir.string() + " is not a run directory (no manifest.json)");
  }
  LoadedRun run;
  run.manifest = manifest_from_json(parse_json_file(manifest_path));
  run.problems = prepared_problems(run.manifest);
  run.records = read_records(run_dir / "records.jsonl");
  std::set<std::string> have;
  for (const auto& r : run.records) have.insert(r.problem_id);
  for (const auto& p : run.problems) {
    if (!have.contains(p.id)) {
      throw ConfigError(run_dir.string() + " is incomplete: no record for \"" + p.id + "\"");
    }
  }
  return run;
}

ScoreCard rescore(const LoadedRun& run, const ScoringPolicy& policy) {
  std::map<std::string, const RunRecord*> by_id;
  for (const auto& r : run.records) by_id[r.problem_id] = &r;
  std::vector<std::pair<Problem, ProblemScore>> scored;
  for (const auto& p : run.problems) {
    const RunRecord& r = *by_id.at(p.id);
    double s = 0.0;
    if (!r.failed) s = score(extract(r.trace.final_text, p), p, policy);
    scored.emplace_back(p, ProblemScore::make(p.id, s));
  }
  return aggregate(scored);
}

RunDiff diff_scorecards(const ScoreCard& a, const ScoreCard& b,
                        ScoringPolicy::Benchmark benchmark) {
  std::set<std::string> ids_a;
  std::set<std::string> ids_b;
  for (const auto& s : a.per_problem) ids_a.insert(s.problem_id);
  for (const auto& s : b.per_problem) ids_b.insert(s.problem_id);
  if (ids_a != ids_b) throw ConfigError("runs cover different problem sets");

  RunDiff diff;
  diff.benchmark = benchmark;
  for (const auto& [key, stat_a] : a.groups) {
    auto it = b.groups.find(key);
    if (it == b.groups.end()) throw ConfigError("runs have different group structure");
    diff.deltas.push_back({key, stat_a.mean_score, it->second.mean_score,
                           it->second.mean_score - stat_a.mean_score});
  }
  return diff;
}

RunDiff diff_runs(const fs::path& a, const fs::path& b) {
  const json meta_a = parse_json_file(a / "meta.json");
  const json meta_b = parse_json_file(b / "meta.json");
  if (meta_a.at("dataset_sha256") != meta_b.at("dataset_sha256")) {
    throw ConfigError("runs use different datasets");
  }
  if (meta_a.at("scoring_policy") != meta_b.at("scoring_policy")) {
    throw ConfigError("runs use different scoring policies");
  }
  const ScoringPolicy policy =
      ScoringPolicy::from_name(meta_a.at("scoring_policy").get<std::string>());
  return diff_scorecards(scorecard_from_json(parse_json_file(a / "scorecard.json")),
                         scorecard_from_json(parse_json_file(b / "scorecard.json")),
                         policy.benchmark);
}

std::string format_delta(double delta, ScoringPolicy::Benchmark benchmark) {
  const bool gpqa = benchmark == ScoringPolicy::Benchmark::gpqa;
  const double value = gpqa ? delta * 100.0 : delta;
  const int decimals = gpqa ? 2 : 3;
  const double scale = std::pow(10.0, decimals);
  const double rounded = std::round(value * scale) / scale;
  if (rounded == 0.0) return gpqa ? "0.00" : "0";
  const std::string body = gpqa ? format_fixed(std::fabs(rounded), 2)
                                : format_trimmed(std::fabs(rounded), 3);
  return rounded > 0 ? "+" + body + "\xE2\x86\x91" : "-" + body + "\xE2\x86\x93";
}

std::string to_markdown(const RunDiff& diff) {
  const bool gpqa = diff.benchmark == ScoringPolicy::Benchmark::gpqa;
  auto cell = [&](double v) { return gpqa ? format_percent(v) : format_fraction(v); };
  std::string out = "| dimension | group | a | b | delta |\n|---|---|---|---|---|\n";
  for (const auto& d : diff.deltas) {
    out += "| " + std::string(to_string(d.key.dimension)) + " | " + d.key.key + " | " +
           cell(d.a) + " | " + cell(d.b) + " | " + format_delta(d.delta, diff.benchmark) +
           " |\n";
  }
  return out;
}

}  // namespace sot
