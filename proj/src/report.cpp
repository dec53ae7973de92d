#include "sot/report.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sot/analysis.hpp"
#include "sot/errors.hpp"
#include "sot/runner.hpp"
#include "sot/scoring.hpp"
#include "sot/text.hpp"

namespace sot {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(TableKind k) {
  switch (k) {
    case TableKind::gpqa_grid: return "gpqa_grid";
    case TableKind::jeebench_grid: return "jeebench_grid";
    case TableKind::transfer: return "transfer";
    case TableKind::ablation: return "ablation";
    case TableKind::technique_totals: return "technique_totals";
    case TableKind::similarity: return "similarity";
    case TableKind::correlation: return "correlation";
  }
  return "";
}

std::optional<TableKind> parse_table_kind(std::string_view s) {
  for (auto k : {TableKind::gpqa_grid, TableKind::jeebench_grid, TableKind::transfer,
                 TableKind::ablation, TableKind::technique_totals, TableKind::similarity,
                 TableKind::correlation}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(PlotKind k) {
  return k == PlotKind::domain_breakdown ? "domain_breakdown" : "correlation_heatmap";
}

std::optional<PlotKind> parse_plot_kind(std::string_view s) {
  if (s == "domain_breakdown") return PlotKind::domain_breakdown;
  if (s == "correlation_heatmap") return PlotKind::correlation_heatmap;
  return std::nullopt;
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<fs::path> path_list(const json& j, const char* field) {
  if (!j.is_array()) throw ConfigError(std::string("table spec: ") + field + " must be a list");
  std::vector<fs::path> out;
  for (const auto& v : j) {
    if (!v.is_string()) {
      throw ConfigError(std::string("table spec: ") + field + " entries must be strings");
    }
    out.emplace_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

TableSpec table_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("table spec: expected a JSON object");
  static const std::set<std::string> keys = {"kind", "inputs", "baselines", "output_dir",
                                             "plot_data"};
  for (const auto& [k, v] : j.items()) {
    if (!keys.contains(k)) throw ConfigError("table spec: unknown key \"" + k + "\"");
  }
  TableSpec spec;
  if (!j.contains("kind") || !j.at("kind").is_string()) {
    throw ConfigError("table spec: \"kind\" must be a string");
  }
  auto kind = parse_table_kind(j.at("kind").get<std::string>());
  if (!kind) throw ConfigError("table spec: unknown kind \"" + j.at("kind").get<std::string>() + "\"");
  spec.kind = *kind;
  if (!j.contains("inputs")) throw ConfigError("table spec: missing \"inputs\"");
  spec.inputs = path_list(j.at("inputs"), "inputs");
  if (spec.inputs.empty()) throw ConfigError("table spec: inputs must be non-empty");
  if (j.contains("baselines")) {
    spec.baselines = path_list(j.at("baselines"), "baselines");
    if (!spec.baselines.empty() && spec.kind != TableKind::gpqa_grid &&
        spec.kind != TableKind::jeebench_grid) {
      throw ConfigError("table spec: baselines apply only to gpqa_grid and jeebench_grid");
    }
  }
  if (!j.contains("output_dir") || !j.at("output_dir").is_string()) {
    throw ConfigError("table spec: \"output_dir\" must be a string");
  }
  spec.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("plot_data")) {
    if (!j.at("plot_data").is_array()) throw ConfigError("table spec: plot_data must be a list");
    for (const auto& v : j.at("plot_data")) {
      auto k = v.is_string() ? parse_plot_kind(v.get<std::string>()) : std::nullopt;
      if (!k) throw ConfigError("table spec: unknown plot_data kind " + v.dump());
      spec.plot_data.push_back(*k);
    }
  }
  return spec;
}

TableSpec load_table_spec(const fs::path& path) { return table_spec_from_json(read_json(path)); }

void mark_best(Table& t) {
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    std::optional<double> best;
    std::size_t count = 0;
    for (const auto& row : t.rows) {
      if (c >= row.size() || !row[c].value) continue;
      ++count;
      if (!best || *row[c].value > *best) best = row[c].value;
    }
    if (count < 2) continue;
    for (auto& row : t.rows) {
      if (c < row.size() && row[c].value && *row[c].value == *best) row[c].bold = true;
    }
  }
}

namespace {

std::string md_escape(const std::string& s) { return replace_all(s, "|", "\\|"); }

// Bold covers the leading number only, so "39.39 (+2.79↑)" renders as
// "**39.39** (+2.79↑)".
std::string md_cell(const Cell& c) {
  if (!c.bold) return md_escape(c.text);
  std::size_t space = c.text.find(' ');
  if (space == std::string::npos) return "**" + md_escape(c.text) + "**";
  return "**" + md_escape(c.text.substr(0, space)) + "**" + md_escape(c.text.substr(space));
}

}  // namespace

std::string to_markdown(const Table& t) {
  std::string out = "|";
  for (const auto& h : t.header) out += " " + md_escape(h) + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    // Label columns are left-aligned, columns holding numbers right-aligned.
    bool numeric = false;
    for (const auto& row : t.rows) {
      if (i < row.size() && !row[i].text.empty() &&
          std::isdigit(static_cast<unsigned char>(row[i].text[0]))) {
        numeric = true;
      }
    }
    out += i > 0 && numeric ? "---:|" : "---|";
  }
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& c : row) out += " " + md_cell(c) + " |";
    out += "\n";
  }
  return out;
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    out += (i ? "," : "") + csv_escape(t.header[i]);
  }
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_escape(row[i].text);
    out += "\n";
  }
  return out;
}

namespace {

struct RunInfo {
  fs::path dir;
  RunManifest manifest;
  json meta;
  ScoreCard card;

  ScoringPolicy::Benchmark benchmark() const { return manifest.scoring.benchmark; }
  std::string model() const { return manifest.solver_model.model_id; }
};

RunInfo load_info(const fs::path& dir) {
  RunInfo info;
  info.dir = dir;
  if (!fs::exists(dir / "manifest.json")) {
    throw ConfigError(dir.string() + " is not a run directory (no manifest.json)");
  }
  if (!fs::exists(dir / "scorecard.json")) {
    throw ConfigError(dir.string() + " has no scorecard.json; the run is incomplete");
  }
  info.manifest = manifest_from_json(read_json(dir / "manifest.json"));
  info.meta = read_json(dir / "meta.json");
  info.card = scorecard_from_json(read_json(dir / "scorecard.json"));
  return info;
}

std::vector<RunInfo> load_infos(const std::vector<fs::path>& dirs) {
  std::vector<RunInfo> out;
  for (const auto& d : dirs) out.push_back(load_info(d));
  return out;
}

void require_compatible(const std::vector<RunInfo>& runs,
                        std::optional<ScoringPolicy::Benchmark> benchmark) {
  for (const auto& r : runs) {
    if (benchmark && r.benchmark() != *benchmark) {
      throw ConfigError(r.dir.string() + " is scored as " + r.manifest.scoring.name() +
                        ", which this table cannot show");
    }
    if (r.benchmark() != runs.front().benchmark()) {
      throw ConfigError("inputs mix GPQA and JEEBench scoring");
    }
    if (r.meta.at("dataset_sha256") != runs.front().meta.at("dataset_sha256")) {
      throw ConfigError(r.dir.string() + " uses a different dataset from " +
                        runs.front().dir.string());
    }
  }
}

Cell text_cell(std::string s) { return {std::move(s), std::nullopt, false}; }

std::string format_score(double v, ScoringPolicy::Benchmark b) {
  return b == ScoringPolicy::Benchmark::gpqa ? format_percent(v) : format_fraction(v);
}

// Percentages are compared in points, fractions as-is.
double display_value(double v, ScoringPolicy::Benchmark b) {
  return b == ScoringPolicy::Benchmark::gpqa ? v * 100.0 : v;
}

Cell score_cell(double v, ScoringPolicy::Benchmark b) {
  return {format_score(v, b), display_value(v, b), false};
}

Cell delta_cell(double v, double base, ScoringPolicy::Benchmark b) {
  return {format_score(v, b) + " (" + format_delta(v - base, b) + ")",
          display_value(v, b), false};
}

const std::vector<std::string>& strategy_order() {
  static const std::vector<std::string> order = {"zero_shot", "zero_shot_cot",
                                                 "analogical_reasoning",
                                                 "knowledge_identification",
                                                 "story_of_thought"};
  return order;
}

std::string strategy_label(const RunManifest& m) {
  static const std::map<std::string, std::string> labels = {
      {"zero_shot", "Zero-shot"},
      {"zero_shot_cot", "Zero-shot CoT"},
      {"analogical_reasoning", "Analogical Reasoning"},
      {"knowledge_identification", "Knowledge Identification"},
      {"story_of_thought", "SoT"}};
  std::string label = labels.at(strategy_name(m.strategy));
  if (const auto* sot = std::get_if<StoryOfThought>(&m.strategy)) {
    if (sot->techniques.size() != kTechniqueCount) {
      std::vector<std::string> codes;
      for (auto t : sot->techniques) codes.emplace_back(short_code(t));
      label += " [";
      for (std::size_t i = 0; i < codes.size(); ++i) label += (i ? "+" : "") + codes[i];
      label += "]";
    }
    if (m.narrator_model) label += " (narrator: " + m.narrator_model->model_id + ")";
  }
  return label;
}

std::size_t strategy_rank(const RunManifest& m) {
  const auto& order = strategy_order();
  return static_cast<std::size_t>(
      std::find(order.begin(), order.end(), strategy_name(m.strategy)) - order.begin());
}

void add_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

const RunInfo* find_baseline(const std::vector<RunInfo>& baselines, const RunInfo& run) {
  for (const auto& b : baselines) {
    if (b.model() == run.model() && strategy_label(b.manifest) == strategy_label(run.manifest)) {
      return &b;
    }
  }
  return nullptr;
}

Table gpqa_grid(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  auto baselines = load_infos(spec.baselines);
  require_compatible(runs, ScoringPolicy::Benchmark::gpqa);
  if (!baselines.empty()) require_compatible(baselines, ScoringPolicy::Benchmark::gpqa);

  std::vector<std::string> models;
  std::vector<std::pair<std::size_t, std::string>> row_keys;
  for (const auto& r : runs) {
    add_unique(models, r.model());
    std::pair<std::size_t, std::string> key{strategy_rank(r.manifest), strategy_label(r.manifest)};
    if (std::find(row_keys.begin(), row_keys.end(), key) == row_keys.end()) row_keys.push_back(key);
  }
  std::stable_sort(row_keys.begin(), row_keys.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  std::map<std::pair<std::string, std::string>, const RunInfo*> cells;
  for (const auto& r : runs) {
    if (!cells.emplace(std::pair{strategy_label(r.manifest), r.model()}, &r).second) {
      throw ConfigError("two inputs fill the cell (" + strategy_label(r.manifest) + ", " +
                        r.model() + ")");
    }
  }

  Table t;
  t.title = "GPQA accuracy (%)";
  t.header = {"Prompting Method"};
  t.header.insert(t.header.end(), models.begin(), models.end());
  for (const auto& [rank, label] : row_keys) {
    std::vector<Cell> row = {text_cell(label)};
    for (const auto& model : models) {
      auto it = cells.find({label, model});
      if (it == cells.end()) {
        row.push_back(text_cell("-"));
        continue;
      }
      const RunInfo& r = *it->second;
      const RunInfo* base = find_baseline(baselines, r);
      row.push_back(base ? delta_cell(r.card.overall(), base->card.overall(), r.benchmark())
                         : score_cell(r.card.overall(), r.benchmark()));
    }
    t.rows.push_back(std::move(row));
  }
  mark_best(t);
  return t;
}

struct GroupColumn {
  std::string header;
  Dimension dimension;
  std::vector<std::string> keys;
};

const std::vector<GroupColumn>& jeebench_columns() {
  static const std::vector<GroupColumn> cols = {
      {"Chemistry", Dimension::subject, {"chemistry", "chem"}},
      {"Mathematics", Dimension::subject, {"mathematics", "maths", "math"}},
      {"Physics", Dimension::subject, {"physics", "phys", "phy"}},
      {"Integer", Dimension::answer_kind, {"integer"}},
      {"Single-Correct", Dimension::answer_kind, {"single_mcq"}},
      {"Multi-Correct", Dimension::answer_kind, {"multi_mcq"}},
      {"Numeric", Dimension::answer_kind, {"numeric"}},
      {"Total", Dimension::overall, {"all"}},
  };
  return cols;
}

const GroupStat* find_group(const ScoreCard& card, const GroupColumn& col) {
  for (const auto& k : col.keys) {
    if (const GroupStat* g = card.find(col.dimension, k)) return g;
  }
  return nullptr;
}

Table jeebench_grid(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  auto baselines = load_infos(spec.baselines);
  require_compatible(runs, ScoringPolicy::Benchmark::jeebench);
  if (!baselines.empty()) require_compatible(baselines, ScoringPolicy::Benchmark::jeebench);

  Table t;
  t.title = "JEEBench aggregate score";
  t.header = {"Model", "Method"};
  for (const auto& col : jeebench_columns()) t.header.push_back(col.header);
  for (const auto& r : runs) {
    const RunInfo* base = find_baseline(baselines, r);
    std::vector<Cell> row = {text_cell(r.model()),
                             text_cell(strategy_label(r.manifest))};
    for (const auto& col : jeebench_columns()) {
      const GroupStat* g = find_group(r.card, col);
      const GroupStat* bg = base ? find_group(base->card, col) : nullptr;
      if (g == nullptr) {
        row.push_back(text_cell("-"));
      } else if (bg != nullptr) {
        row.push_back(delta_cell(g->mean_score, bg->mean_score, r.benchmark()));
      } else {
        row.push_back(score_cell(g->mean_score, r.benchmark()));
      }
    }
    t.rows.push_back(std::move(row));
  }
  mark_best(t);
  return t;
}

void require_sot(const RunInfo& r) {
  if (!std::holds_alternative<StoryOfThought>(r.manifest.strategy)) {
    throw ConfigError(r.dir.string() + " is not a story_of_thought run");
  }
}

Table transfer(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  require_compatible(runs, std::nullopt);
  std::vector<std::string> narrators;
  std::vector<std::string> solvers;
  std::map<std::string, const RunInfo*> own;
  std::map<std::pair<std::string, std::string>, const RunInfo*> cells;
  for (const auto& r : runs) {
    require_sot(r);
    if (!r.manifest.narrator_model) {
      if (!own.emplace(r.model(), &r).second) {
        throw ConfigError("two baseline runs for solver " + r.model());
      }
      continue;
    }
    const std::string& narrator = r.manifest.narrator_model->model_id;
    add_unique(narrators, narrator);
    add_unique(solvers, r.model());
    if (!cells.emplace(std::pair{narrator, r.model()}, &r).second) {
      throw ConfigError("two inputs fill the cell (" + narrator + ", " + r.model() + ")");
    }
  }
  if (cells.empty()) throw ConfigError("transfer needs at least one run with a narrator_model");

  Table t;
  t.title = "Narratives from one model applied to another";
  t.header = {"Narrative Generator"};
  t.header.insert(t.header.end(), solvers.begin(), solvers.end());
  for (const auto& narrator : narrators) {
    std::vector<Cell> row = {text_cell(narrator)};
    for (const auto& solver : solvers) {
      auto it = cells.find({narrator, solver});
      if (it == cells.end()) {
        row.push_back(text_cell("-"));
        continue;
      }
      const RunInfo& r = *it->second;
      auto base = own.find(solver);
      row.push_back(base != own.end()
                        ? delta_cell(r.card.overall(), base->second->card.overall(), r.benchmark())
                        : score_cell(r.card.overall(), r.benchmark()));
    }
    t.rows.push_back(std::move(row));
  }
  mark_best(t);
  return t;
}

Table ablation(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  require_compatible(runs, std::nullopt);
  std::vector<std::string> models;
  // Row index: technique position, or kTechniqueCount for the full set.
  std::map<std::pair<std::size_t, std::string>, const RunInfo*> cells;
  for (const auto& r : runs) {
    require_sot(r);
    if (r.manifest.narrator_model) {
      throw ConfigError(r.dir.string() + " uses a separate narrator; ablation rows need own narratives");
    }
    const auto& techniques = std::get<StoryOfThought>(r.manifest.strategy).techniques;
    std::size_t row;
    if (techniques.size() == 1) {
      row = static_cast<std::size_t>(techniques.front());
    } else if (techniques.size() == kTechniqueCount) {
      row = kTechniqueCount;
    } else {
      throw ConfigError(r.dir.string() + " uses a partial technique set; ablation rows are single "
                        "techniques or all five");
    }
    add_unique(models, r.model());
    if (!cells.emplace(std::pair{row, r.model()}, &r).second) {
      throw ConfigError("two inputs fill one ablation cell for " + r.model());
    }
  }

  Table t;
  t.title = "Single narrative technique versus all techniques";
  t.header = {"Narrative Technique"};
  t.header.insert(t.header.end(), models.begin(), models.end());
  for (std::size_t i = 0; i <= kTechniqueCount; ++i) {
    std::vector<Cell> row = {text_cell(
        i < kTechniqueCount ? std::string(display_name(kAllTechniques[i])) : "All")};
    bool any = false;
    for (const auto& model : models) {
      auto it = cells.find({i, model});
      if (it == cells.end()) {
        row.push_back(text_cell("-"));
        continue;
      }
      any = true;
      const RunInfo& r = *it->second;
      auto all = cells.find({kTechniqueCount, model});
      if (i < kTechniqueCount && all != cells.end()) {
        row.push_back(delta_cell(r.card.overall(), all->second->card.overall(), r.benchmark()));
      } else {
        row.push_back(score_cell(r.card.overall(), r.benchmark()));
      }
    }
    if (any) t.rows.push_back(std::move(row));
  }
  mark_best(t);
  return t;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  for (const auto& line : split_lines(read_file(path))) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(parse_csv_line(line));
  }
  return rows;
}

fs::path analysis_file(const fs::path& run, const char* name) {
  fs::path p = run / "analysis" / name;
  if (!fs::exists(p)) {
    throw ConfigError(run.string() + " has no analysis/" + name + "; run `sot analyze` first");
  }
  return p;
}

std::vector<std::string> column_labels(const std::vector<RunInfo>& runs) {
  std::vector<std::string> labels;
  for (const auto& r : runs) {
    std::string label = r.model();
    if (std::find(labels.begin(), labels.end(), label) != labels.end()) {
      label += " (" + r.manifest.run_id + ")";
    }
    labels.push_back(label);
  }
  return labels;
}

Table technique_totals_table(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  Table t;
  t.title = "Narrative technique occurrences";
  t.header = {"Narrative Technique"};
  auto labels = column_labels(runs);
  t.header.insert(t.header.end(), labels.begin(), labels.end());
  std::vector<std::map<std::string, std::string>> totals;
  for (const auto& r : runs) {
    std::map<std::string, std::string> m;
    for (const auto& row : read_csv_rows(analysis_file(r.dir, "technique_totals.csv"))) {
      if (row.size() == 2) m[row[0]] = row[1];
    }
    totals.push_back(std::move(m));
  }
  std::vector<std::pair<std::string, std::string>> rows;
  for (auto tech : kAllTechniques) rows.emplace_back(short_code(tech), short_code(tech));
  rows.emplace_back("\xCE\xA3", "total");
  for (const auto& [label, key] : rows) {
    std::vector<Cell> row = {text_cell(label)};
    for (const auto& m : totals) {
      auto it = m.find(key);
      row.push_back(text_cell(it == m.end() ? "-" : it->second));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table similarity(const TableSpec& spec) {
  struct Entry {
    std::string model;
    std::string kind;
    json values;
  };
  std::vector<Entry> entries;
  std::vector<std::string> models;
  std::vector<std::string> kinds;
  for (const auto& dir : spec.inputs) {
    json j = read_json(analysis_file(dir, "similarity.json"));
    Entry e{j.at("model").get<std::string>(), j.at("reasoning_kind").get<std::string>(), j};
    add_unique(models, e.model);
    add_unique(kinds, e.kind);
    entries.push_back(std::move(e));
  }
  struct Metric {
    const char* header;
    const char* key;
    int decimals;
  };
  const Metric metrics[] = {{"Embed-F1", "embed_f1", 3}, {"ROUGE-L", "rouge_l_f", 3},
                            {"BLEU", "bleu", 2}};
  Table t;
  t.title = "Similarity of generated reasoning to human explanations";
  t.header = {"Model"};
  for (const auto& m : metrics) {
    for (const auto& k : kinds) t.header.push_back(std::string(m.header) + " (" + k + ")");
  }
  for (const auto& model : models) {
    std::vector<Cell> row = {text_cell(model)};
    for (const auto& m : metrics) {
      for (const auto& k : kinds) {
        auto it = std::find_if(entries.begin(), entries.end(),
                               [&](const Entry& e) { return e.model == model && e.kind == k; });
        if (it == entries.end()) {
          row.push_back(text_cell("-"));
          continue;
        }
        const std::string text = format_fixed(it->values.at(m.key).get<double>(), m.decimals);
        row.push_back({text, std::stod(text), false});
      }
    }
    t.rows.push_back(std::move(row));
  }
  mark_best(t);
  return t;
}

Table correlation(const TableSpec& spec) {
  auto runs = load_infos(spec.inputs);
  auto labels = column_labels(runs);
  Table t;
  t.title = "Correlation among narrative techniques";
  t.header = {"Model", "Group", "Tech A", "Tech B", "r", "n", "defined"};
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto& row : read_csv_rows(analysis_file(runs[i].dir, "correlations.csv"))) {
      if (row.size() != 6) throw ConfigError("malformed correlations.csv in " + runs[i].dir.string());
      const std::string r = row[3].empty() ? "" : format_fixed(std::stod(row[3]), 3);
      t.rows.push_back({text_cell(labels[i]), text_cell(row[0]), text_cell(row[1]),
                        text_cell(row[2]), text_cell(r), text_cell(row[4]), text_cell(row[5])});
    }
  }
  return t;
}

}  // namespace

Table render_table(const TableSpec& spec) {
  if (spec.inputs.empty()) throw ConfigError("table spec: inputs must be non-empty");
  switch (spec.kind) {
    case TableKind::gpqa_grid: return gpqa_grid(spec);
    case TableKind::jeebench_grid: return jeebench_grid(spec);
    case TableKind::transfer: return transfer(spec);
    case TableKind::ablation: return ablation(spec);
    case TableKind::technique_totals: return technique_totals_table(spec);
    case TableKind::similarity: return similarity(spec);
    case TableKind::correlation: return correlation(spec);
  }
  throw ConfigError("unsupported table kind");
}

std::string emit_plot_data(PlotKind kind, const std::vector<fs::path>& inputs) {
  std::string out;
  if (kind == PlotKind::domain_breakdown) {
    out = "run_id,model,strategy,subject,mean_score,n\n";
    for (const auto& dir : inputs) {
      RunInfo r = load_info(dir);
      for (const auto& [key, stat] : r.card.groups) {
        if (key.dimension != Dimension::subject) continue;
        out += csv_escape(r.manifest.run_id) + "," + csv_escape(r.model()) + "," +
               csv_escape(strategy_label(r.manifest)) + "," + csv_escape(key.key) + "," +
               format_fixed(stat.mean_score, 6) + "," + std::to_string(stat.n) + "\n";
      }
    }
    return out;
  }
  out = "run_id,model,group,tech_a,tech_b,r,n,defined\n";
  for (const auto& dir : inputs) {
    RunInfo r = load_info(dir);
    for (const auto& row : read_csv_rows(analysis_file(dir, "correlations.csv"))) {
      if (row.size() != 6) throw ConfigError("malformed correlations.csv in " + dir.string());
      out += csv_escape(r.manifest.run_id) + "," + csv_escape(r.model());
      for (const auto& f : row) out += "," + csv_escape(f);
      out += "\n";
    }
  }
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

ReportFiles write_report(const TableSpec& spec) {
  Table table = render_table(spec);
  fs::create_directories(spec.output_dir / "tables");
  ReportFiles files;
  files.markdown = spec.output_dir / "report.md";
  std::string md = "# " + table.title + "\n\n" + to_markdown(table);
  const fs::path csv = spec.output_dir / "tables" / (std::string(to_string(spec.kind)) + ".csv");
  write_text(csv, to_csv(table));
  files.csvs.push_back(csv);
  for (PlotKind k : spec.plot_data) {
    const fs::path p = spec.output_dir / "tables" / (std::string(to_string(k)) + ".csv");
    write_text(p, emit_plot_data(k, spec.inputs));
    files.csvs.push_back(p);
  }
  if (!spec.plot_data.empty()) {
    md += "\nPlot data:\n\n";
    for (std::size_t i = 1; i < files.csvs.size(); ++i) {
      md += "- `tables/" + files.csvs[i].filename().string() + "`\n";
    }
  }
  write_text(files.markdown, md);
  return files;
}

}  // namespace sot
