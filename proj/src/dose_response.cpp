#include "mvgps/dose_response.hpp"

#include <cmath>
#include <string>

#include "mvgps/errors.hpp"
#include "mvgps/stats.hpp"

namespace mvgps {

namespace {

Eigen::Index term_count(const SurfaceFormula& formula, Eigen::Index m) {
  return 1 + m * formula.degree + (formula.interaction ? 1 : 0);
}

void validate_formula(const SurfaceFormula& formula, Eigen::Index m) {
  if (formula.degree < 1)
    throw ValidationError(errc::invalid_argument, "surface formula: degree must be at least 1");
  if (formula.interaction && m != 2)
    throw ValidationError(errc::invalid_argument,
                          "surface formula: interaction term requires exactly two exposures");
}

// Column layout: intercept, linear terms d_1..d_m, higher powers grouped by
// degree, interaction last. total_abs_bias depends on the linear terms
// sitting at columns 1..m.
Eigen::MatrixXd build_design(const Eigen::MatrixXd& exposures, const SurfaceFormula& formula) {
  const Eigen::Index n = exposures.rows();
  const Eigen::Index m = exposures.cols();
  Eigen::MatrixXd design(n, term_count(formula, m));
  design.col(0).setOnes();
  Eigen::Index next = 1;
  for (int power = 1; power <= formula.degree; ++power)
    for (Eigen::Index j = 0; j < m; ++j)
      design.col(next++) = exposures.col(j).array().pow(power);
  if (formula.interaction)
    design.col(next++) = exposures.col(0).cwiseProduct(exposures.col(1));
  return design;
}

std::vector<std::string> term_names(const Dataset& data, const SurfaceFormula& formula) {
  const Eigen::Index m = data.n_exposures();
  auto name = [&](Eigen::Index j) {
    return j < static_cast<Eigen::Index>(data.exposure_names.size())
               ? data.exposure_names[static_cast<std::size_t>(j)]
               : "d" + std::to_string(j + 1);
  };
  std::vector<std::string> names{"intercept"};
  for (int power = 1; power <= formula.degree; ++power)
    for (Eigen::Index j = 0; j < m; ++j)
      names.push_back(power == 1 ? name(j) : name(j) + "^" + std::to_string(power));
  if (formula.interaction) names.push_back(name(0) + "*" + name(1));
  return names;
}

}  // namespace

DoseResponseFit fit_dose_response(const Dataset& data, const WeightSet& ws,
                                  const SurfaceFormula& formula, const Region& region) {
  validate_dataset(data);
  validate_formula(formula, data.n_exposures());
  if (data.outcome.size() != data.n())
    throw ValidationError(errc::invalid_argument, "fit_dose_response: dataset has no outcome");
  if (ws.weights.size() != data.n())
    throw ValidationError(errc::shape_mismatch,
                          "fit_dose_response: weight length differs from dataset rows");
  if (region.dimension != data.n_exposures())
    throw ValidationError(errc::shape_mismatch,
                          "fit_dose_response: region dimension differs from exposure count");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd point = data.exposures.row(i);
    if (contains(region, point)) keep.push_back(i);
  }
  const Eigen::Index terms = term_count(formula, data.n_exposures());
  if (static_cast<Eigen::Index>(keep.size()) < terms + 1)
    throw NumericalError(errc::insufficient_support,
                         "fit_dose_response: only " + std::to_string(keep.size()) +
                             " units inside the region for " + std::to_string(terms) + " terms");

  Eigen::MatrixXd exposures(static_cast<Eigen::Index>(keep.size()), data.n_exposures());
  Eigen::VectorXd response(static_cast<Eigen::Index>(keep.size()));
  Eigen::VectorXd weights(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    exposures.row(static_cast<Eigen::Index>(r)) = data.exposures.row(keep[r]);
    response(static_cast<Eigen::Index>(r)) = data.outcome(keep[r]);
    weights(static_cast<Eigen::Index>(r)) = ws.weights(keep[r]);
  }

  DoseResponseFit fit;
  fit.formula = formula;
  fit.region = region;
  fit.weight_tag = ws.method_tag;
  fit.trim_q = ws.trim_q;
  fit.n_retained = static_cast<Eigen::Index>(keep.size());
  fit.ess_retained = effective_sample_size(weights);
  fit.term_names = term_names(data, formula);
  fit.n_exposures = static_cast<int>(data.n_exposures());
  fit.coefficients = fit_least_squares(build_design(exposures, formula), response, weights);
  return fit;
}

Eigen::VectorXd predict_surface(const DoseResponseFit& fit, const Eigen::MatrixXd& points) {
  if (points.cols() != fit.n_exposures)
    throw ValidationError(errc::shape_mismatch,
                          "predict_surface: point dimension differs from fit exposures");
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd point = points.row(i);
    if (!contains(fit.region, point)) {
      std::string coords = "(";
      for (Eigen::Index j = 0; j < point.size(); ++j)
        coords += (j ? ", " : "") + std::to_string(point(j));
      throw NumericalError(errc::extrapolation,
                           "predict_surface: point " + coords +
                               ") lies outside the estimable region");
    }
  }
  return build_design(points, fit.formula) * fit.coefficients.coefficients;
}

double total_abs_bias(const DoseResponseFit& fit, const Eigen::VectorXd& true_alpha) {
  if (true_alpha.size() != fit.n_exposures)
    throw ValidationError(errc::metric_undefined,
                          "total_abs_bias: truth length differs from exposure count");
  double total = 0.0;
  for (Eigen::Index j = 0; j < true_alpha.size(); ++j)
    total += std::abs(true_alpha(j) - fit.coefficients.coefficients(1 + j));
  return total;
}

double rmse_on_region(const DoseResponseFit& fit, const Eigen::VectorXd& true_alpha,
                      const Region& region, Eigen::Index count) {
  if (true_alpha.size() != fit.n_exposures)
    throw ValidationError(errc::metric_undefined,
                          "rmse_on_region: truth length differs from exposure count");
  const Eigen::MatrixXd grid = region_grid(region, count);
  const Eigen::VectorXd truth = grid * true_alpha;
  const Eigen::VectorXd predicted = predict_surface(fit, grid);
  return std::sqrt((truth - predicted).squaredNorm() / static_cast<double>(count));
}

}  // namespace mvgps
