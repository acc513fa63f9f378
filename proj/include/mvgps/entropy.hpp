#pragma once

#include "mvgps/dataset.hpp"
#include "mvgps/gps.hpp"

namespace mvgps {

struct EntropyOptions {
  int max_iter = 200;
  double tol = 1e-8;  // max absolute moment-constraint violation at the solution
};

// Entropy-balancing weights for exposure j (0-based): minimize
// sum_i w_i log w_i subject to sum w_i = n, weighted means of the
// standardized exposure and its confounders equal zero, and weighted means
// of the centered exposure-confounder cross products equal zero. Solved in
// the convex dual (log-sum-exp objective) by damped Newton iterations; the
// weights are n * softmax of the dual scores. Model-free: no propensity
// densities are estimated.
WeightSet entropy_balance(const Dataset& data, int j, const EntropyOptions& opts = {});

}  // namespace mvgps
