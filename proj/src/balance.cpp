#include "mvgps/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mvgps/errors.hpp"
#include "mvgps/stats.hpp"

namespace mvgps {

BalanceReport balance_report(const Dataset& data, const WeightSet& ws, BalanceScope scope) {
  validate_dataset(data);
  if (ws.weights.size() != data.n())
    throw ValidationError(errc::shape_mismatch,
                          "balance_report: weight length differs from dataset rows");
  validate_weights(ws.weights);

  std::vector<int> columns;
  if (scope == BalanceScope::all_covariates) {
    columns.resize(static_cast<std::size_t>(data.n_covariates()));
    for (std::size_t k = 0; k < columns.size(); ++k) columns[k] = static_cast<int>(k);
  } else {
    std::set<int> unions;
    for (const auto& cset : data.confounder_sets) unions.insert(cset.begin(), cset.end());
    columns.assign(unions.begin(), unions.end());
  }

  BalanceReport report;
  report.method_tag = ws.method_tag;
  report.trim_q = ws.trim_q;
  report.ess = effective_sample_size(ws.weights);

  double max_abs = 0.0, sum_abs = 0.0;
  int defined = 0;
  for (Eigen::Index j = 0; j < data.n_exposures(); ++j) {
    for (int col : columns) {
      PairCorrelation pair;
      pair.exposure = static_cast<int>(j);
      pair.covariate = col;
      try {
        pair.value = weighted_pearson(data.exposures.col(j), data.covariates.col(col), ws.weights);
      } catch (const NumericalError&) {
        pair.defined = false;
        pair.value = std::numeric_limits<double>::quiet_NaN();
        ++report.undefined_pairs;
      }
      if (pair.defined) {
        max_abs = std::max(max_abs, std::abs(pair.value));
        sum_abs += std::abs(pair.value);
        ++defined;
      }
      report.pair_correlations.push_back(pair);
    }
  }

  if (defined == 0) {
    report.max_abs_corr = std::numeric_limits<double>::quiet_NaN();
    report.avg_abs_corr = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.max_abs_corr = max_abs;
    report.avg_abs_corr = sum_abs / defined;
  }
  return report;
}

}  // namespace mvgps
