#include "mvgps/io.hpp"

#include <charconv>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mvgps/errors.hpp"
#include "mvgps/version.hpp"

namespace mvgps::io {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

[[noreturn]] void fail_field(const std::string& file, const std::string& path,
                             const std::string& what) {
  throw ValidationError(errc::invalid_argument, file + ": " + path + ": " + what);
}

std::string item_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

json parse_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(errc::io_error, path + ": cannot open");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError(errc::invalid_argument, path + ": " + e.what());
  }
}

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& file) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const auto& key : allowed) known = known || key == item.key();
    if (!known) fail_field(file, item.key(), "unknown key");
  }
}

const json& member(const json& obj, const std::string& key, const std::string& file) {
  if (!obj.is_object()) fail_field(file, "$", "expected a JSON object");
  auto it = obj.find(key);
  if (it == obj.end()) fail_field(file, key, "missing required key");
  return *it;
}

double num_at(const json& v, const std::string& file, const std::string& path) {
  if (!v.is_number()) fail_field(file, path, "expected a number");
  return v.get<double>();
}

long long int_at(const json& v, const std::string& file, const std::string& path) {
  if (!v.is_number_integer()) fail_field(file, path, "expected an integer");
  return v.get<long long>();
}

std::string string_at(const json& v, const std::string& file, const std::string& path) {
  if (!v.is_string()) fail_field(file, path, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list_at(const json& v, const std::string& file,
                                        const std::string& path) {
  if (!v.is_array() || v.empty()) fail_field(file, path, "expected a non-empty array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(string_at(v[i], file, item_path(path, i)));
  return out;
}

std::vector<double> number_list_at(const json& v, const std::string& file,
                                   const std::string& path) {
  if (!v.is_array() || v.empty()) fail_field(file, path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(num_at(v[i], file, item_path(path, i)));
  return out;
}

Eigen::VectorXd vector_at(const json& v, const std::string& file, const std::string& path) {
  const std::vector<double> values = number_list_at(v, file, path);
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

Eigen::MatrixXd matrix_at(const json& v, const std::string& file, const std::string& path) {
  if (!v.is_array() || v.empty()) fail_field(file, path, "expected a non-empty array of rows");
  Eigen::MatrixXd out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Eigen::VectorXd row = vector_at(v[i], file, item_path(path, i));
    if (i == 0)
      out.resize(static_cast<Eigen::Index>(v.size()), row.size());
    else if (row.size() != out.cols())
      fail_field(file, item_path(path, i),
                 "has " + std::to_string(row.size()) + " entries, expected " +
                     std::to_string(out.cols()));
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

std::vector<std::vector<int>> index_sets_at(const json& v, const std::string& file,
                                            const std::string& path) {
  if (!v.is_array() || v.empty()) fail_field(file, path, "expected a non-empty array of arrays");
  std::vector<std::vector<int>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const json& set = v[i];
    const std::string set_path = item_path(path, i);
    if (!set.is_array()) fail_field(file, set_path, "expected an array of column indices");
    std::vector<int> indices;
    for (std::size_t k = 0; k < set.size(); ++k) {
      const long long idx = int_at(set[k], file, item_path(set_path, k));
      if (idx < 0) fail_field(file, item_path(set_path, k), "index must be non-negative");
      indices.push_back(static_cast<int>(idx));
    }
    out.push_back(std::move(indices));
  }
  return out;
}

json number_list(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json row_lists(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(number_list(m.row(i).transpose()));
  return out;
}

double parse_cell(const std::string& cell, const std::string& file, const std::string& column,
                  std::size_t data_row) {
  const std::string where =
      file + ": column '" + column + "', data row " + std::to_string(data_row + 1);
  if (cell.empty())
    throw ValidationError(errc::invalid_argument, where + ": missing value (not imputed)");
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, value, std::chars_format::general);
  if (ec != std::errc() || ptr != end)
    throw ValidationError(errc::invalid_argument, where + ": not a number: '" + cell + "'");
  return value;
}

std::string name_or(const std::vector<std::string>& names, int idx, const char* prefix) {
  if (idx >= 0 && idx < static_cast<int>(names.size())) return names[static_cast<std::size_t>(idx)];
  return std::string(prefix) + std::to_string(idx + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc()) throw NumericalError(errc::io_error, "number formatting failed");
  return std::string(buf, ptr);
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

Table read_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError(errc::io_error, path + ": cannot open");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (line_no == 1) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      throw ValidationError(errc::invalid_argument,
                            path + ": line " + std::to_string(line_no) + " has " +
                                std::to_string(fields.size()) + " fields, expected " +
                                std::to_string(table.header.size()));
    table.rows.push_back(std::move(fields));
  }
  if (line_no == 0) throw ValidationError(errc::empty_input, path + ": empty file");
  return table;
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream f(path);
  if (!f) throw ValidationError(errc::io_error, path + ": cannot open for writing");
  auto write_row = [&](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (fields[i].find_first_of(",\r\n") != std::string::npos)
        throw ValidationError(errc::invalid_argument,
                              path + ": field contains a delimiter: '" + fields[i] + "'");
      if (i) f << ',';
      f << fields[i];
    }
    f << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size())
      throw ValidationError(errc::shape_mismatch, path + ": ragged row");
    write_row(row);
  }
  if (!f.good()) throw ValidationError(errc::io_error, path + ": write failed");
}

DatasetSpec read_dataset_spec(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_object()) fail_field(path, "$", "expected a JSON object");
  reject_unknown_keys(doc, {"outcome", "exposures", "confounders", "poly"}, path);
  DatasetSpec spec;
  spec.outcome = string_at(member(doc, "outcome", path), path, "outcome");
  spec.exposures = string_list_at(member(doc, "exposures", path), path, "exposures");
  const json& conf = member(doc, "confounders", path);
  if (!conf.is_array() || conf.size() != spec.exposures.size())
    fail_field(path, "confounders",
               "expected one confounder list per exposure (" +
                   std::to_string(spec.exposures.size()) + ")");
  for (std::size_t j = 0; j < conf.size(); ++j)
    spec.confounders.push_back(string_list_at(conf[j], path, item_path("confounders", j)));
  if (doc.contains("poly")) {
    const json& poly = doc["poly"];
    if (!poly.is_array()) fail_field(path, "poly", "expected an array of declarations");
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const std::string p = item_path("poly", i);
      const json& decl = poly[i];
      if (!decl.is_object()) fail_field(path, p, "expected an object");
      reject_unknown_keys(decl, {"column", "degree", "exposure"}, path);
      DatasetSpec::PolyDecl out;
      out.column = string_at(member(decl, "column", path), path, p + ".column");
      out.degree = static_cast<int>(int_at(member(decl, "degree", path), path, p + ".degree"));
      out.exposure =
          static_cast<int>(int_at(member(decl, "exposure", path), path, p + ".exposure"));
      if (out.degree < 2) fail_field(path, p + ".degree", "must be at least 2");
      if (out.exposure < 1 || out.exposure > static_cast<int>(spec.exposures.size()))
        fail_field(path, p + ".exposure",
                   "exposure index out of range 1.." + std::to_string(spec.exposures.size()));
      spec.poly.push_back(std::move(out));
    }
  }
  return spec;
}

Dataset load_dataset(const std::string& csv_path, const DatasetSpec& spec) {
  const Table t = read_csv(csv_path);
  std::unordered_map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (!columns.emplace(t.header[i], i).second)
      throw ValidationError(errc::invalid_argument,
                            csv_path + ": duplicate column '" + t.header[i] + "'");
  auto resolve = [&](const std::string& name) {
    auto it = columns.find(name);
    if (it == columns.end())
      throw ValidationError(errc::invalid_argument,
                            csv_path + ": column '" + name + "' not found");
    return it->second;
  };

  // Role overlap is a spec-file mistake, not a modeling choice.
  for (const auto& d : spec.exposures)
    if (d == spec.outcome)
      throw ValidationError(errc::invalid_argument,
                            csv_path + ": column '" + d + "' is both outcome and exposure");
  for (const auto& set : spec.confounders)
    for (const auto& c : set) {
      if (c == spec.outcome)
        throw ValidationError(errc::invalid_argument,
                              csv_path + ": column '" + c + "' is both outcome and confounder");
      for (const auto& d : spec.exposures)
        if (c == d)
          throw ValidationError(
              errc::invalid_argument,
              csv_path + ": column '" + c + "' is both exposure and confounder");
    }

  std::vector<std::string> pool;
  std::unordered_map<std::string, int> pool_index;
  for (const auto& set : spec.confounders)
    for (const auto& name : set)
      if (pool_index.emplace(name, static_cast<int>(pool.size())).second) pool.push_back(name);

  const std::size_t n = t.rows.size();
  if (n == 0) throw ValidationError(errc::empty_input, csv_path + ": no data rows");

  Dataset data;
  data.outcome.resize(static_cast<Eigen::Index>(n));
  data.exposures.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(spec.exposures.size()));
  data.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pool.size()));
  const std::size_t outcome_col = resolve(spec.outcome);
  std::vector<std::size_t> exposure_cols, pool_cols;
  for (const auto& name : spec.exposures) exposure_cols.push_back(resolve(name));
  for (const auto& name : pool) pool_cols.push_back(resolve(name));
  for (std::size_t i = 0; i < n; ++i) {
    data.outcome(static_cast<Eigen::Index>(i)) =
        parse_cell(t.rows[i][outcome_col], csv_path, spec.outcome, i);
    for (std::size_t j = 0; j < exposure_cols.size(); ++j)
      data.exposures(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_cell(t.rows[i][exposure_cols[j]], csv_path, spec.exposures[j], i);
    for (std::size_t k = 0; k < pool_cols.size(); ++k)
      data.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          parse_cell(t.rows[i][pool_cols[k]], csv_path, pool[k], i);
  }

  for (const auto& set : spec.confounders) {
    std::vector<int> indices;
    for (const auto& name : set) {
      const int idx = pool_index.at(name);
      for (int seen : indices)
        if (seen == idx)
          throw ValidationError(errc::invalid_argument,
                                csv_path + ": column '" + name + "' repeated in one set");
      indices.push_back(idx);
    }
    data.confounder_sets.push_back(std::move(indices));
  }
  data.outcome_name = spec.outcome;
  data.exposure_names = spec.exposures;
  data.covariate_names = pool;

  std::vector<PolyTerm> terms;
  for (const auto& decl : spec.poly) {
    auto it = pool_index.find(decl.column);
    if (it == pool_index.end())
      throw ValidationError(errc::invalid_argument,
                            csv_path + ": polynomial column '" + decl.column +
                                "' is not a declared confounder");
    terms.push_back(PolyTerm{decl.exposure - 1, it->second, decl.degree});
  }
  if (!terms.empty()) data = expand_polynomial(data, terms);
  validate_dataset(data);
  return data;
}

ScenarioConfig read_scenario_json(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_object()) fail_field(path, "$", "expected a JSON object");
  reject_unknown_keys(doc,
                      {"name", "beta", "alpha_x", "alpha_d", "sigma_x", "cond_sd", "cond_rho",
                       "sigma_y", "n", "confounder_sets"},
                      path);
  ScenarioConfig cfg;
  cfg.name = string_at(member(doc, "name", path), path, "name");
  cfg.beta = matrix_at(member(doc, "beta", path), path, "beta");
  cfg.alpha_x = vector_at(member(doc, "alpha_x", path), path, "alpha_x");
  cfg.alpha_d = vector_at(member(doc, "alpha_d", path), path, "alpha_d");
  cfg.sigma_x = matrix_at(member(doc, "sigma_x", path), path, "sigma_x");
  cfg.cond_sd = vector_at(member(doc, "cond_sd", path), path, "cond_sd");
  cfg.cond_rho = num_at(member(doc, "cond_rho", path), path, "cond_rho");
  cfg.sigma_y = num_at(member(doc, "sigma_y", path), path, "sigma_y");
  const long long n = int_at(member(doc, "n", path), path, "n");
  if (n < 1) fail_field(path, "n", "must be positive");
  cfg.n = static_cast<Eigen::Index>(n);
  cfg.confounder_sets =
      index_sets_at(member(doc, "confounder_sets", path), path, "confounder_sets");
  try {
    validate_scenario(cfg);
  } catch (const Error& e) {
    throw ValidationError(e.code(), path + ": " + e.what());
  }
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  ordered_json doc;
  doc["name"] = cfg.name;
  doc["beta"] = row_lists(cfg.beta);
  doc["alpha_x"] = number_list(cfg.alpha_x);
  doc["alpha_d"] = number_list(cfg.alpha_d);
  doc["sigma_x"] = row_lists(cfg.sigma_x);
  doc["cond_sd"] = number_list(cfg.cond_sd);
  doc["cond_rho"] = cfg.cond_rho;
  doc["sigma_y"] = cfg.sigma_y;
  doc["n"] = static_cast<long long>(cfg.n);
  doc["confounder_sets"] = cfg.confounder_sets;
  return doc.dump(2) + "\n";
}

StudySettings read_study_config(const std::string& path) {
  const json doc = parse_json_file(path);
  if (!doc.is_object()) fail_field(path, "$", "expected a JSON object");
  reject_unknown_keys(
      doc,
      {"scenarios", "rho_grid", "methods", "trim_levels", "B", "n", "master_seed", "grid_points"},
      path);
  StudySettings s;
  s.scenarios = string_list_at(member(doc, "scenarios", path), path, "scenarios");
  s.rho_grid = number_list_at(member(doc, "rho_grid", path), path, "rho_grid");
  s.methods = string_list_at(member(doc, "methods", path), path, "methods");
  s.trim_levels = number_list_at(member(doc, "trim_levels", path), path, "trim_levels");
  for (std::size_t i = 0; i < s.trim_levels.size(); ++i)
    if (!(s.trim_levels[i] > 0.5 && s.trim_levels[i] <= 1.0))
      fail_field(path, item_path("trim_levels", i), "must lie in (0.5, 1]");
  const long long b = int_at(member(doc, "B", path), path, "B");
  if (b < 1) fail_field(path, "B", "must be positive");
  s.B = static_cast<int>(b);
  if (doc.contains("n")) {
    const long long n = int_at(doc["n"], path, "n");
    if (n < 2) fail_field(path, "n", "must be at least 2");
    s.n = static_cast<Eigen::Index>(n);
  }
  if (doc.contains("master_seed")) {
    const json& seed = doc["master_seed"];
    if (!seed.is_number_integer() || (seed.is_number_integer() && !seed.is_number_unsigned() &&
                                      seed.get<long long>() < 0))
      fail_field(path, "master_seed", "expected a non-negative integer");
    s.master_seed = seed.get<std::uint64_t>();
  }
  if (doc.contains("grid_points")) {
    const long long g = int_at(doc["grid_points"], path, "grid_points");
    if (g < 1) fail_field(path, "grid_points", "must be positive");
    s.grid_points = static_cast<Eigen::Index>(g);
  }
  return s;
}

nlohmann::ordered_json study_config_to_json(const StudySettings& s) {
  ordered_json doc;
  doc["scenarios"] = s.scenarios;
  doc["rho_grid"] = s.rho_grid;
  doc["methods"] = s.methods;
  doc["trim_levels"] = s.trim_levels;
  doc["B"] = s.B;
  doc["n"] = static_cast<long long>(s.n);
  doc["master_seed"] = s.master_seed;
  doc["grid_points"] = static_cast<long long>(s.grid_points);
  return doc;
}

void write_weights_csv(const std::string& path, const Eigen::VectorXd& weights) {
  Table t;
  t.header = {"row_id", "weight"};
  for (Eigen::Index i = 0; i < weights.size(); ++i)
    t.rows.push_back({std::to_string(i + 1), format_double(weights(i))});
  write_csv(path, t);
}

Eigen::VectorXd read_weights_csv(const std::string& path) {
  const Table t = read_csv(path);
  if (t.header != std::vector<std::string>{"row_id", "weight"})
    throw ValidationError(errc::invalid_argument,
                          path + ": expected header 'row_id,weight'");
  Eigen::VectorXd w(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    w(static_cast<Eigen::Index>(i)) = parse_cell(t.rows[i][1], path, "weight", i);
  return w;
}

nlohmann::ordered_json balance_to_json(const BalanceReport& report, const Dataset& data) {
  ordered_json doc;
  doc["method"] = report.method_tag;
  if (report.trim_q)
    doc["trim_q"] = *report.trim_q;
  else
    doc["trim_q"] = nullptr;
  doc["max_abs_corr"] = report.max_abs_corr;
  doc["avg_abs_corr"] = report.avg_abs_corr;
  doc["ess"] = report.ess;
  doc["undefined_pairs"] = report.undefined_pairs;
  ordered_json pairs = ordered_json::array();
  for (const auto& pc : report.pair_correlations) {
    ordered_json pair;
    pair["exposure"] = name_or(data.exposure_names, pc.exposure, "d");
    pair["covariate"] = name_or(data.covariate_names, pc.covariate, "c");
    if (pc.defined)
      pair["correlation"] = pc.value;
    else
      pair["correlation"] = nullptr;
    pair["defined"] = pc.defined;
    pairs.push_back(std::move(pair));
  }
  doc["pairs"] = std::move(pairs);
  return doc;
}

Table balance_to_table(const BalanceReport& report, const Dataset& data) {
  Table t;
  t.header = {"exposure", "covariate", "correlation", "defined"};
  for (const auto& pc : report.pair_correlations)
    t.rows.push_back({name_or(data.exposure_names, pc.exposure, "d"),
                      name_or(data.covariate_names, pc.covariate, "c"),
                      format_double(pc.value), pc.defined ? "true" : "false"});
  return t;
}

void write_study_csv(const std::string& path, const StudyResult& result) {
  Table t;
  t.header = {"scenario", "cond_rho", "marginal_rho", "method", "trim_q",
              "metric",   "value",    "reps",         "failures"};
  for (const auto& row : result.rows)
    t.rows.push_back({row.scenario, format_double(row.cond_rho), format_double(row.marginal_rho),
                      row.method, format_double(row.trim_q), row.metric,
                      format_double(row.value), std::to_string(row.reps),
                      std::to_string(row.failures)});
  write_csv(path, t);
}

void write_metric_csv(const std::string& path, const StudyResult& result,
                      const std::string& metric) {
  Table t;
  t.header = {"scenario", "marginal_rho", "method", "trim_q", "value"};
  for (const auto& row : result.rows)
    if (row.metric == metric)
      t.rows.push_back({row.scenario, format_double(row.marginal_rho), row.method,
                        format_double(row.trim_q), format_double(row.value)});
  write_csv(path, t);
}

std::uint64_t fnv1a64(const void* bytes, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(bytes);
  std::uint64_t hash = 14695981039346656037ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string digest_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError(errc::io_error, path + ": cannot open");
  std::ostringstream buffer;
  buffer << f.rdbuf();
  const std::string bytes = buffer.str();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes.data(), bytes.size())));
  return hex;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::string& manifest_path, const RunInfo& info) {
  ordered_json doc;
  doc["artifact_version"] = kVersion;
  doc["command"] = info.command;
  doc["command_line"] = info.command_line;
  doc["resolved_config"] = info.resolved_config;
  if (info.master_seed)
    doc["master_seed"] = *info.master_seed;
  else
    doc["master_seed"] = nullptr;
  ordered_json inputs = ordered_json::array();
  for (const auto& path : info.inputs) {
    ordered_json entry;
    entry["path"] = path;
    entry["fnv1a64"] = digest_file(path);
    inputs.push_back(std::move(entry));
  }
  doc["inputs"] = std::move(inputs);
  doc["outputs"] = info.outputs;
  doc["started_at"] = info.started_at;
  doc["finished_at"] = timestamp_utc();
  if (!info.notes.empty()) doc["notes"] = info.notes;
  std::ofstream f(manifest_path);
  if (!f) throw ValidationError(errc::io_error, manifest_path + ": cannot open for writing");
  f << doc.dump(2) << '\n';
  if (!f.good()) throw ValidationError(errc::io_error, manifest_path + ": write failed");
}

}  // namespace mvgps::io
