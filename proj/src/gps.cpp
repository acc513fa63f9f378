#include "mvgps/gps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mvgps/errors.hpp"
#include "mvgps/stats.hpp"

namespace mvgps {

namespace {

std::vector<int> resolve_order(const Dataset& data, const std::vector<int>& order) {
  const int m = static_cast<int>(data.exposures.cols());
  if (order.empty()) {
    std::vector<int> identity(static_cast<std::size_t>(m));
    std::iota(identity.begin(), identity.end(), 0);
    return identity;
  }
  if (static_cast<int>(order.size()) != m)
    throw ValidationError(errc::invalid_argument, "exposure order: length differs from exposure count");
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  for (int idx : order) {
    if (idx < 0 || idx >= m || seen[static_cast<std::size_t>(idx)])
      throw ValidationError(errc::invalid_argument,
                            "exposure order: not a permutation of 0.." + std::to_string(m - 1));
    seen[static_cast<std::size_t>(idx)] = true;
  }
  return order;
}

// Design for chain position j: intercept, the conditioning covariate
// columns, then the prior exposures in factorization order.
Eigen::MatrixXd chain_design(const Dataset& data, const std::vector<int>& order,
                             const std::vector<int>& cov_cols, std::size_t position) {
  const Eigen::Index n = data.n();
  Eigen::MatrixXd design(n, 1 + static_cast<Eigen::Index>(cov_cols.size() + position));
  design.col(0).setOnes();
  Eigen::Index next = 1;
  for (int col : cov_cols) design.col(next++) = data.covariates.col(col);
  for (std::size_t k = 0; k < position; ++k)
    design.col(next++) = data.exposures.col(order[k]);
  return design;
}

LinearFit fit_chain_factor(const Dataset& data, const std::vector<int>& order,
                           const std::vector<int>& cov_cols, std::size_t position,
                           const char* role) {
  const Eigen::MatrixXd design = chain_design(data, order, cov_cols, position);
  const Eigen::VectorXd response = data.exposures.col(order[position]);
  try {
    return fit_least_squares(design, response);
  } catch (const NumericalError& e) {
    const std::string name =
        order[position] < static_cast<int>(data.exposure_names.size())
            ? data.exposure_names[static_cast<std::size_t>(order[position])]
            : "exposure " + std::to_string(order[position] + 1);
    throw NumericalError(e.code(), std::string(role) + " fit for " + name + ": " + e.what());
  }
}

}  // namespace

PropensityFit fit_mvgps(const Dataset& data, const std::vector<int>& order) {
  validate_dataset(data);
  PropensityFit fit;
  fit.order = resolve_order(data, order);
  fit.design_transforms = data.applied_transforms;
  const std::size_t m = fit.order.size();
  fit.conditioning_sets.reserve(m);
  fit.denominator_chain.reserve(m);
  fit.numerator_chain.reserve(m);
  static const std::vector<int> no_covariates;
  for (std::size_t j = 0; j < m; ++j) {
    const auto& cset = data.confounder_sets[static_cast<std::size_t>(fit.order[j])];
    fit.conditioning_sets.push_back(cset);
    fit.denominator_chain.push_back(fit_chain_factor(data, fit.order, cset, j, "denominator"));
    fit.numerator_chain.push_back(fit_chain_factor(data, fit.order, no_covariates, j, "numerator"));
  }
  return fit;
}

WeightSet evaluate_weights(const PropensityFit& fit, const Dataset& data) {
  const std::size_t m = fit.order.size();
  if (m == 0) throw ValidationError(errc::empty_exposure, "evaluate_weights: empty chain");
  if (data.exposures.cols() != static_cast<Eigen::Index>(m))
    throw ValidationError(errc::shape_mismatch,
                          "evaluate_weights: dataset exposure count differs from fit");
  for (const auto& cset : fit.conditioning_sets)
    for (int col : cset)
      if (col < 0 || col >= data.covariates.cols())
        throw ValidationError(errc::shape_mismatch,
                              "evaluate_weights: dataset lacks covariate column " +
                                  std::to_string(col));
  for (std::size_t j = 0; j < m; ++j)
    if (fit.denominator_chain[j].residual_sd <= 0.0 || fit.numerator_chain[j].residual_sd <= 0.0)
      throw NumericalError(errc::degenerate_density,
                           "evaluate_weights: chain factor " + std::to_string(j + 1) +
                               " has zero residual spread, density degenerate");

  const Eigen::Index n = data.n();
  static const std::vector<int> no_covariates;
  Eigen::VectorXd log_w = Eigen::VectorXd::Zero(n);
  for (std::size_t j = 0; j < m; ++j) {
    const Eigen::VectorXd response = data.exposures.col(fit.order[j]);
    const Eigen::VectorXd num_mean =
        chain_design(data, fit.order, no_covariates, j) * fit.numerator_chain[j].coefficients;
    const Eigen::VectorXd den_mean =
        chain_design(data, fit.order, fit.conditioning_sets[j], j) *
        fit.denominator_chain[j].coefficients;
    const double num_sd = fit.numerator_chain[j].residual_sd;
    const double den_sd = fit.denominator_chain[j].residual_sd;
    for (Eigen::Index i = 0; i < n; ++i)
      log_w(i) += log_normal_pdf(response(i), num_mean(i), num_sd) -
                  log_normal_pdf(response(i), den_mean(i), den_sd);
  }

  WeightSet ws;
  ws.weights = log_w.array().exp();
  ws.method_tag = "mvGPS";
  if (!(ws.weights.array().isFinite().all()) || (ws.weights.array() <= 0.0).any())
    throw NumericalError(errc::degenerate_density,
                         "evaluate_weights: non-finite or non-positive weight produced");
  return ws;
}

WeightSet trim_weights(const WeightSet& ws, double q) {
  if (!(q > 0.5 && q <= 1.0))
    throw ValidationError(errc::invalid_trim, "trim_weights: q must lie in (0.5, 1]");
  WeightSet out = ws;
  out.trim_q = q;
  if (q == 1.0) return out;
  const double lo = sample_quantile(ws.weights, 1.0 - q);
  const double hi = sample_quantile(ws.weights, q);
  out.weights = ws.weights.cwiseMax(lo).cwiseMin(hi);
  return out;
}

WeightSet fit_univariate_gps(const Dataset& data, int j) {
  validate_dataset(data);
  if (j < 0 || j >= data.exposures.cols())
    throw ValidationError(errc::invalid_argument,
                          "fit_univariate_gps: exposure index " + std::to_string(j + 1) +
                              " out of range for " + std::to_string(data.exposures.cols()) +
                              " exposures");
  Dataset sub = data;
  sub.exposures = data.exposures.col(j);
  sub.confounder_sets = {data.confounder_sets[static_cast<std::size_t>(j)]};
  if (!data.exposure_names.empty())
    sub.exposure_names = {data.exposure_names[static_cast<std::size_t>(j)]};
  WeightSet ws = evaluate_weights(fit_mvgps(sub), sub);
  ws.method_tag = "gps_uni(" + std::to_string(j + 1) + ")";
  return ws;
}

WeightSet unit_weights(Eigen::Index n) {
  WeightSet ws;
  ws.weights = Eigen::VectorXd::Ones(n);
  ws.method_tag = "unweighted";
  return ws;
}

}  // namespace mvgps
