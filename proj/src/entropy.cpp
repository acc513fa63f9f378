#include "mvgps/entropy.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "mvgps/errors.hpp"

namespace mvgps {

namespace {

Eigen::VectorXd standardize(const Eigen::VectorXd& x, const char* what) {
  const double mean = x.mean();
  const double sd = std::sqrt((x.array() - mean).square().mean());
  if (!(sd > 0.0))
    throw ValidationError(errc::invalid_argument,
                          std::string("entropy_balance: ") + what + " has zero variance");
  return (x.array() - mean) / sd;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  return top + std::log((v.array() - top).exp().sum());
}

}  // namespace

WeightSet entropy_balance(const Dataset& data, int j, const EntropyOptions& opts) {
  validate_dataset(data);
  if (j < 0 || j >= data.exposures.cols())
    throw ValidationError(errc::invalid_argument,
                          "entropy_balance: exposure index " + std::to_string(j + 1) +
                              " out of range");
  if (opts.max_iter < 1 || !(opts.tol > 0.0))
    throw ValidationError(errc::invalid_argument, "entropy_balance: bad solver options");

  const Eigen::Index n = data.n();
  const auto& cset = data.confounder_sets[static_cast<std::size_t>(j)];
  const Eigen::Index p = static_cast<Eigen::Index>(cset.size());
  const Eigen::Index k = 1 + 2 * p;

  // Constraint matrix: standardized exposure, standardized confounders, and
  // their elementwise products. Standardized columns have zero sample mean,
  // so driving every weighted column mean to zero pins the first moments at
  // their sample values and zeroes each weighted cross moment, hence each
  // weighted exposure-confounder correlation. The zero dual vector is
  // optimal exactly when the raw sample already satisfies the constraints.
  Eigen::MatrixXd constraints(n, k);
  constraints.col(0) = standardize(data.exposures.col(j), "exposure");
  for (Eigen::Index c = 0; c < p; ++c) {
    constraints.col(1 + c) =
        standardize(data.covariates.col(cset[static_cast<std::size_t>(c)]), "confounder");
    constraints.col(1 + p + c) =
        constraints.col(0).cwiseProduct(constraints.col(1 + c));
  }

  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd prob(n);
  double violation = 0.0;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Eigen::VectorXd scores = constraints * lambda;
    prob = (scores.array() - scores.maxCoeff()).exp();
    prob /= prob.sum();

    const Eigen::VectorXd grad = constraints.transpose() * prob;
    violation = grad.cwiseAbs().maxCoeff();
    if (violation < opts.tol) {
      WeightSet ws;
      ws.weights = static_cast<double>(n) * prob;
      ws.method_tag = "entropy(" + std::to_string(j + 1) + ")";
      return ws;
    }
    if (lambda.cwiseAbs().maxCoeff() > 1e8)
      throw NumericalError(errc::infeasible_constraints,
                           "entropy_balance: dual diverged, constraints appear infeasible "
                           "(violation " + std::to_string(violation) + ")");

    Eigen::MatrixXd hessian =
        constraints.transpose() * prob.asDiagonal() * constraints - grad * grad.transpose();
    hessian.diagonal().array() += 1e-12 * std::max(1.0, hessian.trace() / static_cast<double>(k));
    const Eigen::VectorXd step = hessian.ldlt().solve(grad);

    const double f0 = log_sum_exp(scores);
    double t = 1.0;
    while (t > 1e-12 && log_sum_exp(constraints * (lambda - t * step)) > f0) t *= 0.5;
    lambda -= t * step;
  }
  throw NumericalError(errc::no_convergence,
                       "entropy_balance: no convergence after " + std::to_string(opts.max_iter) +
                           " iterations (violation " + std::to_string(violation) + ")");
}

}  // namespace mvgps
