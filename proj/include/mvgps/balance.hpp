#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mvgps/dataset.hpp"
#include "mvgps/gps.hpp"

namespace mvgps {

enum class BalanceScope {
  confounders_only,  // union of declared confounder sets, crossed with every exposure
  all_covariates,    // every covariate column, crossed with every exposure
};

struct PairCorrelation {
  int exposure = 0;   // 0-based exposure column
  int covariate = 0;  // 0-based covariate column
  double value = 0.0;
  bool defined = true;  // false when the weighted variance degenerates
};

// Weighted exposure-covariate correlations with their max/avg absolute
// summaries and the Kish effective sample size. Undefined pairs (zero
// weighted variance) are excluded from the summaries and counted, never
// treated as 0 or 1: a degenerate column is a data problem to surface.
struct BalanceReport {
  std::vector<PairCorrelation> pair_correlations;
  double max_abs_corr = 0.0;
  double avg_abs_corr = 0.0;
  double ess = 0.0;
  std::string method_tag;
  std::optional<double> trim_q;
  int undefined_pairs = 0;
};

// The default scope judges every method on the union of all declared
// confounder sets, so a single-exposure method is also scored on the other
// exposure's confounders.
BalanceReport balance_report(const Dataset& data, const WeightSet& ws,
                             BalanceScope scope = BalanceScope::confounders_only);

}  // namespace mvgps
