#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sot/datasets.hpp"
#include "sot/extraction.hpp"
#include "sot/llm.hpp"
#include "sot/scoring.hpp"
#include "sot/strategies.hpp"

namespace sot {

struct ModelRef {
  std::string model_id;
  std::string provider_id;
  bool operator==(const ModelRef&) const = default;
};

struct RunManifest {
  std::string run_id;
  std::filesystem::path dataset_path;
  StrategySpec strategy;
  ModelRef solver_model;
  std::optional<ModelRef> narrator_model;
  std::optional<std::size_t> gold_position;
  ScoringPolicy scoring;
  int concurrency = 1;
  std::uint64_t seed = 0;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;
  std::filesystem::path output_dir;
  std::filesystem::path cache_dir;
  std::vector<ProviderConfig> providers;

  std::filesystem::path run_dir() const { return output_dir / run_id; }
};

// Throws ConfigError on unknown keys, missing fields or inconsistent values.
RunManifest manifest_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunManifest& m);
RunManifest load_manifest(const std::filesystem::path& path);

struct RunRecord {
  std::string problem_id;
  StrategyTrace trace;
  PredictedAnswer predicted;
  ProblemScore score;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  double cost_estimate = 0.0;
  bool failed = false;
  std::string error;
};

nlohmann::json to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& j);

// Parses records.jsonl. A truncated final line (interrupted write) is ignored;
// any other malformed line throws ConfigError.
std::vector<RunRecord> read_records(const std::filesystem::path& path);

struct ExecuteOptions {
  // Overrides the providers built from the manifest (tests inject mocks).
  std::shared_ptr<ProviderRegistry> registry;
  // Stop after this many newly executed problems; 0 means no limit.
  std::size_t max_new_records = 0;
  // Checked before each problem is claimed.
  const std::atomic<bool>* stop = nullptr;
};

struct RunSummary {
  std::filesystem::path run_dir;
  std::size_t total = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::size_t max_in_flight = 0;
  double total_cost = 0.0;
  bool complete = false;
  std::optional<ScoreCard> scorecard;
};

// Runs every problem of the manifest's dataset through the strategy, then
// extraction and scoring. Records already persisted without failure are
// skipped; a complete run rewrites records.jsonl in dataset order and emits
// scorecard.json, scorecard.csv and meta.json.
RunSummary execute_run(const RunManifest& m, const ExecuteOptions& options = {});

// Builds providers named by the manifest's solver and narrator references.
std::shared_ptr<ProviderRegistry> build_registry(const RunManifest& m);

// Loads the manifest echo and problems used by an existing run directory,
// with gold_position applied.
struct LoadedRun {
  RunManifest manifest;
  std::vector<Problem> problems;
  std::vector<RunRecord> records;
};
LoadedRun load_run(const std::filesystem::path& run_dir);

// Recomputes predicted answers and scores of stored traces under `policy`.
ScoreCard rescore(const LoadedRun& run, const ScoringPolicy& policy);

struct GroupDelta {
  GroupKey key;
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
};

struct RunDiff {
  ScoringPolicy::Benchmark benchmark = ScoringPolicy::Benchmark::gpqa;
  std::vector<GroupDelta> deltas;
};

// Group means b - a. Throws ConfigError when the runs cover different
// problems or use different scoring policies.
RunDiff diff_runs(const std::filesystem::path& a, const std::filesystem::path& b);
RunDiff diff_scorecards(const ScoreCard& a, const ScoreCard& b,
                        ScoringPolicy::Benchmark benchmark);

// "+2.79↑" / "-3.39↓" for GPQA percentages, "+0.05↑" for JEEBench fractions;
// a delta that rounds to zero has no sign or arrow.
std::string format_delta(double delta, ScoringPolicy::Benchmark benchmark);
std::string to_markdown(const RunDiff& diff);

}  // namespace sot
