#include "sot/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <thread>

#include "sot/errors.hpp"
#include "sot/hashing.hpp"
#include "sot/text.hpp"

namespace sot {

namespace fs = std::filesystem;
using nlohmann::json;

json to_json(const TechniqueCounts& c) {
  json counts = json::object();
  for (auto t : kAllTechniques) counts[std::string(short_code(t))] = c[t];
  return {{"problem_id", c.problem_id},
          {"counts", counts},
          {"low_confidence", c.low_confidence}};
}

namespace {

std::size_t index_of(NarrativeTechnique t) { return static_cast<std::size_t>(t); }

// Display names with optional plural, matched as whole words.
const std::regex& mention_pattern(NarrativeTechnique t) {
  static const std::regex patterns[] = {
      std::regex(R"(\bprogressive\s+disclosures?\b)", std::regex::icase),
      std::regex(R"(\bbranching\b)", std::regex::icase),
      std::regex(R"(\banalog(y|ies)\b)", std::regex::icase),
      std::regex(R"(\banalogical\s+reasoning\b)", std::regex::icase),
      std::regex(R"(\bmetaphors?\b)", std::regex::icase),
  };
  return patterns[index_of(t)];
}

std::optional<NarrativeTechnique> technique_from_label(std::string_view label) {
  std::string name = to_lower(trim(label));
  for (auto t : kAllTechniques) {
    std::string display = to_lower(display_name(t));
    if (name == display || name == display + "s") return t;
  }
  if (name == "analogies") return NarrativeTechnique::analogy;
  return std::nullopt;
}

// Drops emphasis markers and a leading bullet or list number.
std::string clean_line(std::string_view line) {
  std::string s;
  for (char c : line) {
    if (c != '*' && c != '_' && c != '`') s += c;
  }
  static const std::regex bullet(R"(^\s*(?:[-#>•]+|\d+[.)])\s*)");
  return trim(std::regex_replace(s, bullet, "", std::regex_constants::format_first_only));
}

}  // namespace

TechniqueCounts parse_annotation(std::string_view annotator_text, std::string problem_id) {
  static const std::regex colon_form(R"(^([A-Za-z][A-Za-z ]*?)\s*[:=]\s*(\d+)\b)");
  static const std::regex paren_form(
      R"(^([A-Za-z][A-Za-z ]*?)\s*\(\s*(\d+)\s+occurrences?\s*\))", std::regex::icase);

  TechniqueCounts out;
  out.problem_id = std::move(problem_id);
  const std::vector<std::string> lines = split_lines(annotator_text);

  bool primary = false;
  for (const auto& raw : lines) {
    const std::string line = clean_line(raw);
    std::smatch m;
    if (!std::regex_search(line, m, colon_form) && !std::regex_search(line, m, paren_form)) {
      continue;
    }
    auto t = technique_from_label(m[1].str());
    if (!t) continue;
    out.counts[index_of(*t)] = std::stoll(m[2].str());
    primary = true;
  }
  if (primary) return out;

  out.low_confidence = true;
  for (auto t : kAllTechniques) {
    std::set<std::string> spans;
    for (const auto& raw : lines) {
      std::string line = trim(raw);
      if (!line.empty() && std::regex_search(line, mention_pattern(t))) spans.insert(line);
    }
    out.counts[index_of(t)] = static_cast<std::int64_t>(spans.size());
  }
  return out;
}

TechniqueTotals technique_totals(std::span<const TechniqueCounts> counts) {
  TechniqueTotals totals;
  for (const auto& row : counts) {
    for (std::size_t i = 0; i < kTechniqueCount; ++i) {
      totals.per_technique[i] += row.counts[i];
      totals.total += row.counts[i];
    }
  }
  return totals;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw PreconditionError("pearson: inputs differ in length (" +
                            std::to_string(x.size()) + " vs " +
                            std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw PreconditionError("pearson: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string_view to_string(OutcomeGroup g) {
  return g == OutcomeGroup::solved ? "solved" : "unsolved";
}

namespace {

CorrelationMatrix correlate(OutcomeGroup group,
                            const std::vector<const TechniqueCounts*>& rows) {
  CorrelationMatrix m;
  m.group = group;
  m.n = rows.size();
  if (rows.size() < 2) {
    m.insufficient_data = true;
    return m;
  }
  std::array<std::vector<double>, kTechniqueCount> columns;
  for (std::size_t t = 0; t < kTechniqueCount; ++t) {
    for (const auto* r : rows) columns[t].push_back(static_cast<double>(r->counts[t]));
  }
  for (std::size_t a = 0; a < kTechniqueCount; ++a) {
    for (std::size_t b = a; b < kTechniqueCount; ++b) {
      std::optional<double> r = pearson(columns[a], columns[b]);
      if (a == b && r) r = 1.0;
      m.entries[a][b] = r;
      m.entries[b][a] = r;
    }
  }
  return m;
}

}  // namespace

std::pair<CorrelationMatrix, CorrelationMatrix> technique_correlations(
    std::span<const TechniqueCounts> counts, const std::map<std::string, bool>& solved_flags) {
  std::vector<const TechniqueCounts*> solved;
  std::vector<const TechniqueCounts*> unsolved;
  for (const auto& row : counts) {
    auto it = solved_flags.find(row.problem_id);
    if (it == solved_flags.end()) {
      throw PreconditionError("no solved flag for problem \"" + row.problem_id + "\"");
    }
    (it->second ? solved : unsolved).push_back(&row);
  }
  return {correlate(OutcomeGroup::solved, solved),
          correlate(OutcomeGroup::unsolved, unsolved)};
}

std::string correlations_csv(const std::pair<CorrelationMatrix, CorrelationMatrix>& m) {
  std::string out = "group,tech_a,tech_b,r,n,defined\n";
  for (const CorrelationMatrix* cm : {&m.first, &m.second}) {
    for (std::size_t a = 0; a < kTechniqueCount; ++a) {
      for (std::size_t b = 0; b < kTechniqueCount; ++b) {
        const auto& r = cm->entries[a][b];
        out += std::string(to_string(cm->group)) + "," +
               std::string(short_code(kAllTechniques[a])) + "," +
               std::string(short_code(kAllTechniques[b])) + "," +
               (r ? format_fixed(*r, 6) : std::string()) + "," + std::to_string(cm->n) +
               "," + (r ? "true" : "false") + "\n";
      }
    }
  }
  return out;
}

std::string totals_csv(const TechniqueTotals& totals) {
  std::string out = "technique,count\n";
  for (std::size_t i = 0; i < kTechniqueCount; ++i) {
    out += std::string(short_code(kAllTechniques[i])) + "," +
           std::to_string(totals.per_technique[i]) + "\n";
  }
  out += "total," + std::to_string(totals.total) + "\n";
  return out;
}

std::string reasoning_text(const StrategyTrace& trace) {
  for (const auto& step : trace.steps) {
    if (step.step_name == "narrate") return step.result.text;
  }
  return trace.final_text;
}

namespace {

const StepRecord* narrative_step(const StrategyTrace& trace) {
  for (const auto& step : trace.steps) {
    if (step.step_name == "narrate") return &step;
  }
  return nullptr;
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

AnalysisResult analyze_run(const fs::path& run_dir, const AnalyzeOptions& options,
                           const ResponseCache* cache) {
  const LoadedRun run = load_run(run_dir);
  std::map<std::string, const Problem*> problems;
  for (const auto& p : run.problems) problems[p.id] = &p;

  AnalysisResult result;
  std::vector<const RunRecord*> narrated;
  for (const auto& r : run.records) {
    const StepRecord* step = narrative_step(r.trace);
    if (!r.failed && step != nullptr && !trim(step->result.text).empty()) {
      narrated.push_back(&r);
    }
  }
  result.annotated = std::holds_alternative<StoryOfThought>(run.manifest.strategy);

  const fs::path out_dir = run_dir / "analysis";
  fs::create_directories(out_dir);

  if (result.annotated) {
    if (options.annotator.provider == nullptr) {
      throw PreconditionError("analyze_run: annotator endpoint has no provider");
    }
    std::vector<std::optional<TechniqueCounts>> rows(narrated.size());
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failures{0};
    auto worker = [&] {
      for (std::size_t i = next.fetch_add(1); i < narrated.size(); i = next.fetch_add(1)) {
        const RunRecord& r = *narrated[i];
        CompletionRequest req{options.annotator.model_id,
                              build_annotation_prompt(narrative_step(r.trace)->result.text),
                              options.params.temperature, options.params.max_tokens};
        try {
          CompletionResult res = cached_complete(req, *options.annotator.provider, cache);
          rows[i] = parse_annotation(res.text, r.problem_id);
        } catch (const std::exception&) {
          failures.fetch_add(1);
        }
      }
    };
    const std::size_t n_workers = std::min<std::size_t>(
        static_cast<std::size_t>(std::max(1, options.concurrency)), narrated.size());
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::map<std::string, bool> solved;
    std::string annotations;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i]) continue;
      solved[rows[i]->problem_id] = narrated[i]->score.solved;
      json row = to_json(*rows[i]);
      row["solved"] = narrated[i]->score.solved;
      annotations += row.dump() + "\n";
      result.counts.push_back(std::move(*rows[i]));
    }
    result.annotation_failures = failures.load();
    result.totals = technique_totals(result.counts);
    result.correlations = technique_correlations(result.counts, solved);
    write_text(out_dir / "annotations.jsonl", annotations);
    write_text(out_dir / "technique_totals.csv", totals_csv(result.totals));
    write_text(out_dir / "correlations.csv", correlations_csv(result.correlations));
  }

  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& r : run.records) {
    const Problem* p = problems.at(r.problem_id);
    if (r.failed || !p->human_explanation) continue;
    pairs.emplace_back(reasoning_text(r.trace), *p->human_explanation);
  }
  if (options.embedder != nullptr && !pairs.empty()) {
    result.similarity = similarity_table(pairs, *options.embedder);
    const SimilarityReport& s = *result.similarity;
    json sim = {{"reasoning_kind", strategy_name(run.manifest.strategy)},
                {"model", run.manifest.solver_model.model_id},
                {"embed_f1", s.embed_f1},
                {"rouge_l_f", s.rouge_l_f},
                {"bleu", s.bleu},
                {"n_pairs", s.n_pairs},
                {"embedder", options.embedder_name}};
    write_text(out_dir / "similarity.json", sim.dump(2) + "\n");
  }

  std::size_t low_confidence = 0;
  for (const auto& c : result.counts) low_confidence += c.low_confidence ? 1 : 0;
  const PromptTemplate& tmpl = templates::kAnnotateWithFormat;
  json meta = {{"run_id", run.manifest.run_id},
               {"strategy", strategy_name(run.manifest.strategy)},
               {"solver_model", run.manifest.solver_model.model_id},
               {"annotated", result.annotated},
               {"annotator_model", options.annotator.model_id},
               {"annotation_template",
                {{"name", tmpl.name}, {"version", tmpl.version},
                 {"sha256", sha256_hex(tmpl.text)}}},
               {"annotated_problems", result.counts.size()},
               {"annotation_failures", result.annotation_failures},
               {"low_confidence_annotations", low_confidence},
               {"correlation", "pearson over per-problem counts"},
               {"similarity_pairs", pairs.size()},
               {"embedder", options.embedder != nullptr ? options.embedder_name : ""}};
  write_text(out_dir / "analysis_meta.json", meta.dump(2) + "\n");
  return result;
}

}  // namespace sot
