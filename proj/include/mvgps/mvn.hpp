#pragma once

#include <Eigen/Dense>

#include "mvgps/rng.hpp"

namespace mvgps {

// Draws n independent rows from N(mean, cov). cov must be symmetric positive
// semidefinite: the LDLT factorization accepts exactly singular inputs (a
// zero matrix yields constant rows) and rejects indefinite ones at a pivot
// tolerance of 1e-10 relative to the largest diagonal entry. Output is a
// pure function of the stream state: fixed seed means bit-identical draws.
Eigen::MatrixXd sample_mvn(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                           Eigen::Index n, Rng& rng);

}  // namespace mvgps
