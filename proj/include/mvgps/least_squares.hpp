#pragma once

#include <Eigen/Dense>

namespace mvgps {

// Result of a (weighted) least-squares fit. residual_sd is the weighted
// maximum-likelihood scale estimate sqrt(sum w e^2 / sum w); it is 0 only
// for an exact fit, which is flagged so density evaluation can reject it.
struct LinearFit {
  Eigen::VectorXd coefficients;  // element 0 is the intercept when the design has one
  double residual_sd = 0.0;
  Eigen::Index n_obs = 0;
  Eigen::Index design_rank = 0;
  bool exact_fit = false;
};

// Minimizes sum_i w_i (y_i - x_i^T b)^2 by column-pivoted QR on
// sqrt(w)-scaled rows. Throws NumericalError(singular_design) naming the
// first rejected column if the weighted design is rank deficient.
LinearFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const Eigen::VectorXd& weights);

// Uniform-weight convenience overload.
LinearFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

}  // namespace mvgps
