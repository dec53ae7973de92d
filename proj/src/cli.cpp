#include "sot/cli.hpp"

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <memory>

#include "CLI11.hpp"
#include "sot/analysis.hpp"
#include "sot/datasets.hpp"
#include "sot/errors.hpp"
#include "sot/llm.hpp"
#include "sot/metrics.hpp"
#include "sot/report.hpp"
#include "sot/runner.hpp"
#include "sot/scoring.hpp"
#include "sot/text.hpp"

namespace sot {

namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop.store(true); }

class SigintScope {
 public:
  SigintScope() {
    g_stop.store(false);
    previous_ = std::signal(SIGINT, on_sigint);
  }
  ~SigintScope() { std::signal(SIGINT, previous_); }

 private:
  void (*previous_)(int);
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string overall_text(const ScoreCard& card, const ScoringPolicy& policy) {
  return policy.benchmark == ScoringPolicy::Benchmark::gpqa
             ? format_percent(card.overall()) + "%"
             : format_fraction(card.overall());
}

const ProviderConfig& find_provider(const RunManifest& m, const std::string& id) {
  for (const auto& p : m.providers) {
    if (p.provider_id == id) return p;
  }
  throw ConfigError("the run's manifest has no provider \"" + id + "\"");
}

struct RunArgs {
  std::string manifest;
  std::size_t max_new_records = 0;
};

int cmd_run(const RunArgs& a, std::ostream& out) {
  RunManifest m = load_manifest(a.manifest);
  SigintScope sigint;
  ExecuteOptions opts;
  opts.max_new_records = a.max_new_records;
  opts.stop = &g_stop;
  RunSummary s = execute_run(m, opts);
  out << "run directory: " << s.run_dir.string() << "\n"
      << "problems: " << s.total << " (executed " << s.executed << ", skipped " << s.skipped
      << ", failed " << s.failed << ")\n"
      << "estimated cost: " << format_fixed(s.total_cost, 6) << "\n";
  if (!s.complete) {
    out << "run incomplete; rerun the same manifest to resume\n";
    return g_stop.load() ? kExitRuntimeError : kExitOk;
  }
  out << "overall: " << overall_text(*s.scorecard, m.scoring) << "\n";
  return kExitOk;
}

int cmd_score(const std::string& run_dir, const std::string& policy_name, std::ostream& out) {
  LoadedRun run = load_run(run_dir);
  const ScoringPolicy policy =
      policy_name.empty() ? run.manifest.scoring : ScoringPolicy::from_name(policy_name);
  ScoreCard card = rescore(run, policy);
  const fs::path dir = fs::path(run_dir) / "scores" / policy.name();
  fs::create_directories(dir);
  write_text(dir / "scorecard.json", to_json(card).dump(2) + "\n");
  write_text(dir / "scorecard.csv", to_csv(card));
  out << "policy: " << policy.name() << "\n"
      << "overall: " << overall_text(card, policy) << "\n"
      << "written: " << dir.string() << "\n";
  return kExitOk;
}

struct AnalyzeArgs {
  std::string run;
  std::string annotator;
  std::string provider;
  std::string embedder = "hash";
  int concurrency = 1;
};

std::unique_ptr<Embedder> make_embedder(const std::string& spec, const RunManifest& m) {
  if (spec == "none") return nullptr;
  if (spec == "hash") return std::make_unique<HashEmbedder>(m.seed);
  if (spec.rfind("http:", 0) == 0) {
    const std::string rest = spec.substr(5);
    const auto colon = rest.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw ConfigError("--embedder http form is http:<provider_id>:<model>");
    }
    return std::make_unique<HttpEmbedder>(find_provider(m, rest.substr(0, colon)),
                                          rest.substr(colon + 1));
  }
  throw ConfigError("--embedder must be none, hash or http:<provider_id>:<model>");
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const RunManifest m = load_manifest(fs::path(a.run) / "manifest.json");
  const std::string provider_id = a.provider.empty() ? m.solver_model.provider_id : a.provider;
  std::unique_ptr<ChatProvider> provider;
  try {
    provider = make_provider(find_provider(m, provider_id), m.seed);
  } catch (const ProviderError& e) {
    throw ConfigError(e.what());
  }
  std::unique_ptr<Embedder> embedder = make_embedder(a.embedder, m);
  AnalyzeOptions opts;
  opts.annotator = {provider.get(), a.annotator};
  opts.embedder = embedder.get();
  opts.embedder_name = a.embedder;
  opts.concurrency = a.concurrency;
  opts.params = {m.temperature, m.max_tokens};
  ResponseCache cache(m.cache_dir);
  AnalysisResult r = analyze_run(a.run, opts, &cache);

  if (r.annotated) {
    out << "annotated: " << r.counts.size() << " narratives (" << r.annotation_failures
        << " failed)\n";
    for (std::size_t i = 0; i < kTechniqueCount; ++i) {
      out << "  " << short_code(kAllTechniques[i]) << ": " << r.totals.per_technique[i] << "\n";
    }
    out << "  total: " << r.totals.total << "\n";
  } else {
    out << "no narrative step in this strategy; annotation skipped\n";
  }
  if (r.similarity) {
    out << "similarity over " << r.similarity->n_pairs << " pairs: embed_f1 "
        << format_fixed(r.similarity->embed_f1, 3) << ", rouge_l "
        << format_fixed(r.similarity->rouge_l_f, 3) << ", bleu "
        << format_fixed(r.similarity->bleu, 2) << "\n";
  }
  out << "written: " << (fs::path(a.run) / "analysis").string() << "\n";
  return kExitOk;
}

int cmd_report(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  TableSpec spec = load_table_spec(spec_path);
  if (!out_dir.empty()) spec.output_dir = out_dir;
  ReportFiles files = write_report(spec);
  out << "written: " << files.markdown.string() << "\n";
  for (const auto& c : files.csvs) out << "written: " << c.string() << "\n";
  return kExitOk;
}

int cmd_diff(const std::string& a, const std::string& b, std::ostream& out) {
  out << to_markdown(diff_runs(a, b));
  return kExitOk;
}

int cmd_validate(const std::string& dataset, const std::string& source, std::ostream& out) {
  LoadedProblems loaded = load_problems(dataset, source);
  for (const auto& w : loaded.warnings) out << "warning: " << w << "\n";
  out << loaded.problems.size() << " problems OK\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prompting-strategy experiment harness for science QA benchmarks", "sot"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Execute a run manifest");
  run->add_option("--manifest", run_args.manifest, "Run manifest (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--max-new-records", run_args.max_new_records,
                  "Stop after this many newly executed problems (0 = no limit)");

  std::string score_run;
  std::string score_policy;
  auto* score_cmd = app.add_subcommand("score", "Rescore a run's stored transcripts");
  score_cmd->add_option("--run", score_run, "Run directory")->required()->check(CLI::ExistingDirectory);
  score_cmd->add_option("--policy", score_policy,
                        "gpqa_exact, jeebench_partial or jeebench_all_or_nothing "
                        "(default: the run's policy)");

  AnalyzeArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Annotate narratives, correlate techniques, "
                                                "measure similarity to human explanations");
  analyze->add_option("--run", analyze_args.run, "Run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  analyze->add_option("--annotator", analyze_args.annotator, "Annotator model id")->required();
  analyze->add_option("--provider", analyze_args.provider,
                      "Provider id for the annotator (default: the solver's provider)");
  analyze->add_option("--embedder", analyze_args.embedder,
                      "none, hash or http:<provider_id>:<model>")
      ->capture_default_str();
  analyze->add_option("--concurrency", analyze_args.concurrency, "Parallel annotation calls")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string report_spec;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render tables from run directories");
  report->add_option("--spec", report_spec, "Table spec (JSON)")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Output directory (overrides the spec)");

  std::string diff_a;
  std::string diff_b;
  auto* diff = app.add_subcommand("diff", "Per-group score deltas of run B against run A");
  diff->add_option("--a", diff_a, "Reference run directory")->required()->check(CLI::ExistingDirectory);
  diff->add_option("--b", diff_b, "Compared run directory")->required()->check(CLI::ExistingDirectory);

  std::string cache_dir;
  auto* cache = app.add_subcommand("cache", "Inspect or clear a response cache");
  cache->require_subcommand(1);
  auto* cache_stats = cache->add_subcommand("stats", "Entry count and size");
  auto* cache_clear = cache->add_subcommand("clear", "Delete every entry");
  for (auto* sub : {cache_stats, cache_clear}) {
    sub->add_option("--cache-dir", cache_dir, "Cache directory")->required();
  }

  std::string dataset;
  std::string source;
  auto* validate = app.add_subcommand("validate", "Check a problem JSONL file");
  validate->add_option("--dataset", dataset, "Problem file (JSONL)")->required()->check(CLI::ExistingFile);
  validate->add_option("--source", source, "Expected source_tag (warn on mismatch)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* target = &app;
    for (const CLI::App* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      target = sub;
    }
    out << target->help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const CLI::App* target = &app;
    for (const CLI::App* sub = &app; !sub->get_subcommands().empty();) {
      sub = sub->get_subcommands().front();
      target = sub;
    }
    err << "error: " << e.what() << "\n" << target->help();
    return kExitUserError;
  }

  try {
    if (*run) return cmd_run(run_args, out);
    if (*score_cmd) return cmd_score(score_run, score_policy, out);
    if (*analyze) return cmd_analyze(analyze_args, out);
    if (*report) return cmd_report(report_spec, report_out, out);
    if (*diff) return cmd_diff(diff_a, diff_b, out);
    if (*cache_stats) {
      CacheStats s = ResponseCache(cache_dir).stats();
      out << "entries: " << s.entries << "\nbytes: " << s.bytes << "\n";
      return kExitOk;
    }
    if (*cache_clear) {
      out << "removed: " << ResponseCache(cache_dir).clear() << "\n";
      return kExitOk;
    }
    if (*validate) return cmd_validate(dataset, source, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUserError;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  err << "error: no subcommand\n" << app.help();
  return kExitUserError;
}

}  // namespace sot
