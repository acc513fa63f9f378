#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mvgps/balance.hpp"
#include "mvgps/dataset.hpp"
#include "mvgps/geometry.hpp"
#include "mvgps/gps.hpp"
#include "mvgps/least_squares.hpp"

namespace mvgps {

// Exposure design for the outcome regression. Linear terms are always
// present (so the treatment-effect metrics are always defined); higher
// exposure powers and the pairwise interaction (two exposures only) are
// opt-in, mirroring the surface used for real applications.
struct SurfaceFormula {
  int degree = 1;            // 1 = linear terms only
  bool interaction = false;  // include d1*d2 (requires exactly two exposures)
};

// Weighted least-squares dose-response surface, fitted only on units whose
// exposure lies inside the declared estimable region.
struct DoseResponseFit {
  SurfaceFormula formula;
  LinearFit coefficients;
  Region region;
  std::string weight_tag;
  std::optional<double> trim_q;
  Eigen::Index n_retained = 0;
  double ess_retained = 0.0;
  std::vector<std::string> term_names;
  int n_exposures = 0;
};

DoseResponseFit fit_dose_response(const Dataset& data, const WeightSet& ws,
                                  const SurfaceFormula& formula, const Region& region);

// Evaluates the fitted surface at the given points (rows). Every point must
// lie inside the fit's region; anything outside is an extrapolation error.
Eigen::VectorXd predict_surface(const DoseResponseFit& fit, const Eigen::MatrixXd& points);

// Sum over exposures of |true linear coefficient - estimated|.
double total_abs_bias(const DoseResponseFit& fit, const Eigen::VectorXd& true_alpha);

// Root mean squared error of the fitted surface against the population
// truth y*(d) = alpha^T d, evaluated on a deterministic region_grid of
// `count` points. The truth has zero intercept: generators here have
// mean-zero covariates; supply an adjusted alpha otherwise.
double rmse_on_region(const DoseResponseFit& fit, const Eigen::VectorXd& true_alpha,
                      const Region& region, Eigen::Index count);

}  // namespace mvgps
