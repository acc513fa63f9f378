#pragma once

#include <stdexcept>
#include <string>

namespace mvgps {

// Error taxonomy. Two families drive the CLI exit-code contract:
// ValidationError -> exit 2 (bad inputs, schema, configuration),
// NumericalError  -> exit 3 (rank deficiency, degenerate geometry,
// non-convergence, and similar data-driven numerical failures).
enum class errc {
  degenerate_weights,
  undefined_correlation,
  empty_input,
  invalid_scale,
  singular_design,
  covariance_not_psd,
  degenerate_density,
  invalid_trim,
  no_convergence,
  infeasible_constraints,
  empty_exposure,
  degenerate_hull,
  degenerate_region,
  shape_mismatch,
  insufficient_support,
  extrapolation,
  metric_undefined,
  unknown_scenario,
  invalid_argument,
  io_error,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

 private:
  errc code_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace mvgps
