#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "mvgps/dataset.hpp"
#include "mvgps/least_squares.hpp"

namespace mvgps {

// Per-unit weights with provenance. trim_q is empty until trim_weights has
// been applied (q = 1 is recorded: it marks an explicit no-op trim).
struct WeightSet {
  Eigen::VectorXd weights;
  std::string method_tag;  // "mvGPS" | "gps_uni(j)" | "entropy(j)" | "unweighted"
  std::optional<double> trim_q;
};

// Fitted numerator/denominator conditional chains for the stabilized weight
//   w = prod_j pdf(D_j | D_<j) / prod_j pdf(D_j | C_j, D_<j),
// each factor a univariate normal fitted by least squares. The exposure
// order and the covariate columns each denominator factor conditions on are
// stored so the fit can be evaluated on any schema-compatible dataset.
struct PropensityFit {
  std::vector<int> order;                           // exposure permutation, 0-based
  std::vector<std::vector<int>> conditioning_sets;  // covariate columns, per chain position
  std::vector<LinearFit> denominator_chain;  // position j: D_order[j] ~ 1 + C + prior exposures
  std::vector<LinearFit> numerator_chain;    // position j: D_order[j] ~ 1 + prior exposures
  std::vector<PolyTerm> design_transforms;   // echo of the dataset's declared expansions
};

// Fits both chains on the dataset's declared confounder sets. An empty
// order means column order. Factorization order changes estimated chains
// slightly, so it is caller-specified and recorded.
PropensityFit fit_mvgps(const Dataset& data, const std::vector<int>& order = {});

// Evaluates the stabilized weights at each unit's observed exposures and
// covariates, in log space. Strictly positive by construction; a chain
// factor with zero residual spread is rejected (degenerate density).
WeightSet evaluate_weights(const PropensityFit& fit, const Dataset& data);

// Winsorizes to the [Q(w, 1-q), Q(w, q)] sample-quantile thresholds.
// q = 1 is the identity. Weights are never renormalized after trimming.
WeightSet trim_weights(const WeightSet& ws, double q);

// Single-exposure stabilized GPS weights for exposure j (0-based): the
// mvGPS pipeline applied to the sub-dataset (exposure j, confounders C_j).
WeightSet fit_univariate_gps(const Dataset& data, int j);

// The all-ones comparator arm.
WeightSet unit_weights(Eigen::Index n);

}  // namespace mvgps
