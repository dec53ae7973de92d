#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sot {

enum class TableKind {
  gpqa_grid,
  jeebench_grid,
  transfer,
  ablation,
  technique_totals,
  similarity,
  correlation,
};
std::string_view to_string(TableKind k);
std::optional<TableKind> parse_table_kind(std::string_view s);

enum class PlotKind { domain_breakdown, correlation_heatmap };
std::string_view to_string(PlotKind k);
std::optional<PlotKind> parse_plot_kind(std::string_view s);

struct TableSpec {
  TableKind kind = TableKind::gpqa_grid;
  std::vector<std::filesystem::path> inputs;  // run directories
  // gpqa_grid / jeebench_grid only: runs whose matching cells give deltas.
  std::vector<std::filesystem::path> baselines;
  std::filesystem::path output_dir;
  std::vector<PlotKind> plot_data;
};

// Throws ConfigError on unknown keys or values, or empty inputs.
TableSpec table_spec_from_json(const nlohmann::json& j);
TableSpec load_table_spec(const std::filesystem::path& path);

struct Cell {
  std::string text;
  std::optional<double> value;  // participates in bold-best when set
  bool bold = false;
};

struct Table {
  std::string title;
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

// Marks the maximum value of each column that has at least two values.
void mark_best(Table& t);
std::string to_markdown(const Table& t);
// Same cell text as the Markdown rendering, without emphasis markers.
std::string to_csv(const Table& t);

// Throws ConfigError when the inputs cannot share one table.
Table render_table(const TableSpec& spec);

// Tidy CSV: domain_breakdown has one row per run x subject;
// correlation_heatmap has 50 rows per analyzed run.
std::string emit_plot_data(PlotKind kind,
                           const std::vector<std::filesystem::path>& inputs);

struct ReportFiles {
  std::filesystem::path markdown;
  std::vector<std::filesystem::path> csvs;
};

// Writes report.md and tables/<kind>.csv (plus tables/<plot kind>.csv) under
// spec.output_dir.
ReportFiles write_report(const TableSpec& spec);

}  // namespace sot
