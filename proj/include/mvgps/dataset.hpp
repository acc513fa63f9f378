#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mvgps {

// A declared polynomial confounder term: covariate column `column`, raised to
// powers 2..degree, entering the design for exposure `exposure` (0-based).
struct PolyTerm {
  int exposure = 0;
  int column = 0;
  int degree = 2;
};

// Observed data: outcome, n x m exposures, n x P covariates, and the per-
// exposure confounder column sets. Names are carried for reporting; indices
// are 0-based throughout the library.
struct Dataset {
  Eigen::VectorXd outcome;
  Eigen::MatrixXd exposures;
  Eigen::MatrixXd covariates;
  std::vector<std::vector<int>> confounder_sets;
  std::string outcome_name = "y";
  std::vector<std::string> exposure_names;
  std::vector<std::string> covariate_names;
  std::vector<PolyTerm> applied_transforms;  // set by expand_polynomial

  Eigen::Index n() const { return exposures.rows(); }
  Eigen::Index n_exposures() const { return exposures.cols(); }
  Eigen::Index n_covariates() const { return covariates.cols(); }
};

// Checks the Dataset invariants: consistent row counts, finite values,
// at least one exposure, confounder indices in range, and nonzero variance
// in every confounder column. Throws ValidationError.
void validate_dataset(const Dataset& data);

// Returns a copy with the declared polynomial powers appended as extra
// covariate columns (named "<col>^k") and added to the owning exposure's
// confounder set. The library only ever expands declared terms; it never
// selects terms itself.
Dataset expand_polynomial(const Dataset& data, const std::vector<PolyTerm>& terms);

}  // namespace mvgps
