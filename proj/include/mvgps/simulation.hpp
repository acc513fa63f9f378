#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "mvgps/dataset.hpp"
#include "mvgps/gps.hpp"
#include "mvgps/rng.hpp"

namespace mvgps {

// Full data-generating parameterization of the synthetic benchmarks:
//   X ~ N_P(0, sigma_x),  D | X ~ N_m(beta X, Sigma_cond),  and
//   Y | D, X ~ N(alpha_x'X + alpha_d'D, sigma_y^2),
// where Sigma_cond is compound symmetric with standard deviations cond_sd
// and correlation cond_rho. confounder_sets lists, per exposure, the
// covariate columns with nonzero effects on both that exposure and Y.
struct ScenarioConfig {
  std::string name;
  Eigen::MatrixXd beta;     // m x P
  Eigen::VectorXd alpha_x;  // P
  Eigen::VectorXd alpha_d;  // m
  Eigen::MatrixXd sigma_x;  // P x P
  Eigen::VectorXd cond_sd;  // m
  double cond_rho = 0.0;
  double sigma_y = 1.0;
  Eigen::Index n = 0;
  std::vector<std::vector<int>> confounder_sets;
};

void validate_scenario(const ScenarioConfig& cfg);

// The three built-in benchmark scenarios over 10 covariates and 2 exposures:
// M1 (disjoint confounders), M2 (partially shared), M3 (fully shared).
// Covariate covariance is compound symmetric (variance 1, covariance 0.2),
// conditional exposure SDs are 2, outcome SD 4, treatment effects (1, 1).
ScenarioConfig builtin_scenario(const std::string& name, double cond_rho, Eigen::Index n);

// Conditional exposure covariance implied by cond_sd and cond_rho.
Eigen::MatrixXd conditional_exposure_cov(const ScenarioConfig& cfg);

// Marginal exposure covariance Sigma_D = Sigma_cond + beta sigma_x beta',
// and the correlation of the first exposure pair it implies.
std::pair<Eigen::MatrixXd, double> implied_marginal_cov(const ScenarioConfig& cfg);

// Draws a Dataset from the scenario chain X -> D|X -> Y|D,X. Deterministic
// given the stream: fixed seed, identical dataset.
Dataset generate(const ScenarioConfig& cfg, Rng& rng);

// Which covariates the exact propensity chains condition on.
enum class Conditioning {
  full,          // union of all confounder sets: the exact joint conditional
  per_exposure,  // each exposure's own set: the estimation-time factorization
};

// True-parameter weight chains computed from the scenario's implied joint
// Gaussian of (X, D): population regression coefficients and Schur-
// complement residual SDs, no estimation. Under Conditioning::full the
// resulting stabilized weights are the exact density ratio, for which the
// balance property holds by construction.
PropensityFit population_propensity(const ScenarioConfig& cfg,
                                    Conditioning conditioning = Conditioning::full);

}  // namespace mvgps
