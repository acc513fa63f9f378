#include "mvgps/least_squares.hpp"

#include <cmath>
#include <string>

#include "mvgps/errors.hpp"
#include "mvgps/stats.hpp"

namespace mvgps {

LinearFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                            const Eigen::VectorXd& weights) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (response.size() != n)
    throw ValidationError(errc::shape_mismatch, "fit_least_squares: design/response rows differ");
  if (weights.size() != n)
    throw ValidationError(errc::shape_mismatch, "fit_least_squares: design/weight rows differ");
  if (p == 0) throw ValidationError(errc::empty_input, "fit_least_squares: design has no columns");
  if (n < p)
    throw NumericalError(errc::singular_design,
                         "fit_least_squares: fewer rows than design columns");
  validate_weights(weights);

  const Eigen::VectorXd root_w = weights.array().sqrt();
  const Eigen::MatrixXd scaled = root_w.asDiagonal() * design;
  const Eigen::VectorXd scaled_y = root_w.cwiseProduct(response);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
  if (qr.rank() < p) {
    // The permutation lists pivoted columns first; entry rank() is the first
    // column rejected as linearly dependent on those before it.
    const Eigen::Index offender = qr.colsPermutation().indices()(qr.rank());
    throw NumericalError(errc::singular_design,
                         "fit_least_squares: design column " + std::to_string(offender) +
                             " is linearly dependent on the others");
  }

  LinearFit fit;
  fit.coefficients = qr.solve(scaled_y);
  fit.n_obs = n;
  fit.design_rank = qr.rank();

  const Eigen::VectorXd resid = response - design * fit.coefficients;
  const double sw = weights.sum();
  const double wss = weights.cwiseProduct(resid.cwiseAbs2()).sum();
  fit.residual_sd = std::sqrt(wss / sw);

  const double response_scale =
      std::sqrt(weights.cwiseProduct(response.cwiseAbs2()).sum() / sw);
  if (fit.residual_sd <= 1e-10 * std::max(1.0, response_scale)) {
    fit.residual_sd = 0.0;
    fit.exact_fit = true;
  }
  return fit;
}

LinearFit fit_least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  return fit_least_squares(design, response, Eigen::VectorXd::Ones(design.rows()));
}

}  // namespace mvgps
