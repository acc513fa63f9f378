#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mvgps {

// Monte Carlo study grid: scenarios x conditional-correlation grid x
// weighting methods x trim levels, B repetitions per cell. Repetition r of
// cell (s, rho) draws its stream from (master_seed, s, rho, r), so results
// are a pure function of the settings: independent of execution order and
// of how many worker threads run the repetitions.
struct StudySettings {
  std::vector<std::string> scenarios;  // builtin scenario names
  std::vector<double> rho_grid;        // conditional exposure correlations
  std::vector<std::string> methods;    // e.g. mvGPS, gps_uni(1), entropy(2), unweighted
  std::vector<double> trim_levels;     // e.g. 1.0, 0.99, 0.95 (1.0 = untrimmed)
  int B = 1;
  Eigen::Index n = 200;
  std::uint64_t master_seed = 42;
  Eigen::Index grid_points = 500;  // surface-error grid size
  int jobs = 1;                    // worker threads
};

struct StudyRow {
  std::string scenario;
  double cond_rho = 0.0;
  double marginal_rho = 0.0;
  std::string method;
  double trim_q = 1.0;
  std::string metric;  // max_abs_corr | avg_abs_corr | ess | total_abs_bias | rmse
  double value = 0.0;  // mean over successful repetitions
  int reps = 0;        // successful repetitions entering the mean
  int failures = 0;    // repetitions excluded for this row
};

struct StudyResult {
  std::vector<StudyRow> rows;
  // Rows whose failures exceed 10% of B, formatted for the manifest/log.
  std::vector<std::string> flagged;
};

// Runs the full grid. Per repetition: generate data; fit every method's
// weights; per trim level, trim the weights, compute balance metrics on the
// full sample, and fit the dose-response surface on the hull of the
// exposures trimmed at the same q (untrimmed hull for q = 1), scoring bias
// against the scenario's treatment effects and RMSE on a region grid.
// Failed repetitions are excluded from the affected rows and counted.
StudyResult run_study(const StudySettings& settings);

}  // namespace mvgps
