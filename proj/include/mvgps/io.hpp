#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "mvgps/balance.hpp"
#include "mvgps/dataset.hpp"
#include "mvgps/simulation.hpp"
#include "mvgps/study.hpp"

namespace mvgps::io {

// Doubles are written with 17 significant digits (general format): enough
// for exact binary round-trip, so regression tests can byte-compare files.
std::string format_double(double v);
// Fixed decimals for human-facing summaries only, never for data files.
std::string format_fixed(double v, int decimals);

// In-memory CSV: a header row plus rectangular string rows. Parsing is
// strict: every row must have exactly the header's field count. Fields are
// plain (no quoting); a field therefore cannot contain a comma or newline.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read_csv(const std::string& path);
void write_csv(const std::string& path, const Table& table);

// Column-role mapping for a dataset CSV, read from a JSON sidecar:
//   {"outcome": "y", "exposures": ["d1","d2"],
//    "confounders": [["x1","x3"],["x5","x8"]],
//    "poly": [{"column":"x1","degree":2,"exposure":1}]}   (poly optional)
// Exposure indices inside poly are 1-based, like every user-facing index.
struct DatasetSpec {
  struct PolyDecl {
    std::string column;
    int degree = 2;
    int exposure = 1;
  };
  std::string outcome;
  std::vector<std::string> exposures;
  std::vector<std::vector<std::string>> confounders;
  std::vector<PolyDecl> poly;
};

DatasetSpec read_dataset_spec(const std::string& path);

// Loads the CSV, resolves the spec's column names, parses every referenced
// cell as a double (missing or malformed cells are rejected, never
// imputed), applies the declared polynomial expansions, and validates the
// result. Unreferenced columns are ignored. The covariate pool is the
// union of the confounder columns in first-appearance order.
Dataset load_dataset(const std::string& csv_path, const DatasetSpec& spec);

// ScenarioConfig <-> JSON with keys named exactly as the struct fields;
// confounder_sets are 0-based column indices, as in the library.
ScenarioConfig read_scenario_json(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& cfg);

// Study configuration file. Required keys: scenarios, rho_grid, methods,
// trim_levels, B. Optional: n (200), master_seed (42), grid_points (500).
// Unknown keys are errors; every message carries the offending field path.
// Worker count is a command-line concern and never read from the file.
StudySettings read_study_config(const std::string& path);
nlohmann::ordered_json study_config_to_json(const StudySettings& s);

// Weight files: header "row_id,weight", row_id 1-based.
void write_weights_csv(const std::string& path, const Eigen::VectorXd& weights);
Eigen::VectorXd read_weights_csv(const std::string& path);

// Balance report as JSON and as a one-row-per-pair table
// (exposure,covariate,correlation,defined). Undefined correlations are
// null in JSON and nan in the table.
nlohmann::ordered_json balance_to_json(const BalanceReport& report, const Dataset& data);
Table balance_to_table(const BalanceReport& report, const Dataset& data);

// Long-format study results with the fixed header
// scenario,cond_rho,marginal_rho,method,trim_q,metric,value,reps,failures.
void write_study_csv(const std::string& path, const StudyResult& result);
// One tidy file per metric (scenario,marginal_rho,method,trim_q,value).
void write_metric_csv(const std::string& path, const StudyResult& result,
                      const std::string& metric);

std::uint64_t fnv1a64(const void* bytes, std::size_t size);
// FNV-1a over the file's raw bytes, as 16 lowercase hex digits.
std::string digest_file(const std::string& path);

// Reproducibility record written alongside every command's outputs:
// the command, its full resolved configuration, the seed (when one is in
// play), input digests, output names, and wall-clock timestamps.
struct RunInfo {
  std::string command;
  std::string command_line;
  nlohmann::ordered_json resolved_config;
  std::optional<std::uint64_t> master_seed;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string started_at;  // from timestamp_utc() at process start
  std::vector<std::string> notes;
};

std::string timestamp_utc();
void write_manifest(const std::string& manifest_path, const RunInfo& info);

}  // namespace mvgps::io
