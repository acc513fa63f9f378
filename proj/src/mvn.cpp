#include "mvgps/mvn.hpp"

#include <cmath>
#include <string>

#include "mvgps/errors.hpp"

namespace mvgps {

Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           Eigen::Index n, Rng& rng) {
  const Eigen::Index k = mean.size();
  if (cov.rows() != k || cov.cols() != k)
    throw ValidationError(errc::shape_mismatch, "sample_mvn: covariance shape does not match mean");
  if (n < 0) throw ValidationError(errc::invalid_argument, "sample_mvn: negative sample count");

  const double max_abs = cov.cwiseAbs().maxCoeff();
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, max_abs))
    throw NumericalError(errc::covariance_not_psd, "sample_mvn: covariance is not symmetric");

  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  Eigen::VectorXd d = ldlt.vectorD();
  const double tol = 1e-10 * std::max(0.0, cov.diagonal().maxCoeff());
  for (Eigen::Index i = 0; i < k; ++i) {
    if (d(i) < -tol)
      throw NumericalError(errc::covariance_not_psd,
                           "sample_mvn: covariance is not positive semidefinite (pivot " +
                               std::to_string(d(i)) + ")");
    if (d(i) < 0.0) d(i) = 0.0;
  }

  // transform M with M M^T = cov, from cov = P^T L D L^T P.
  Eigen::MatrixXd transform = ldlt.matrixL();
  transform = transform * d.cwiseSqrt().asDiagonal();
  transform = ldlt.transpositionsP().transpose() * transform;

  // Fill unit-major so each row consumes consecutive stream draws.
  Eigen::MatrixXd z(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) z(i, j) = rng.normal();

  Eigen::MatrixXd out = z * transform.transpose();
  out.rowwise() += mean.transpose();
  return out;
}

}  // namespace mvgps
