#include "mvgps/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvgps/errors.hpp"

namespace mvgps {

namespace {

bool all_finite(const Eigen::MatrixXd& m) { return m.array().isFinite().all(); }

}  // namespace

void validate_dataset(const Dataset& data) {
  const Eigen::Index n = data.exposures.rows();
  const Eigen::Index m = data.exposures.cols();
  if (m < 1) throw ValidationError(errc::empty_exposure, "dataset: at least one exposure required");
  if (n < 1) throw ValidationError(errc::empty_input, "dataset: no rows");
  if (data.covariates.rows() != n)
    throw ValidationError(errc::shape_mismatch, "dataset: covariate rows differ from exposure rows");
  if (data.outcome.size() != 0 && data.outcome.size() != n)
    throw ValidationError(errc::shape_mismatch, "dataset: outcome length differs from exposure rows");
  if (!all_finite(data.exposures) || !all_finite(data.covariates) ||
      (data.outcome.size() != 0 && !data.outcome.array().isFinite().all()))
    throw ValidationError(errc::invalid_argument, "dataset: non-finite values present");
  if (data.confounder_sets.size() != static_cast<std::size_t>(m))
    throw ValidationError(errc::shape_mismatch,
                          "dataset: confounder_sets size differs from exposure count");

  for (std::size_t j = 0; j < data.confounder_sets.size(); ++j) {
    for (int col : data.confounder_sets[j]) {
      if (col < 0 || col >= data.covariates.cols())
        throw ValidationError(errc::invalid_argument,
                              "dataset: confounder index " + std::to_string(col) +
                                  " out of range for exposure " + std::to_string(j + 1));
      const auto column = data.covariates.col(col);
      const double mean = column.mean();
      if ((column.array() - mean).abs().maxCoeff() == 0.0)
        throw ValidationError(errc::invalid_argument,
                              "dataset: confounder column " + std::to_string(col) +
                                  " has zero variance");
    }
  }
}

Dataset expand_polynomial(const Dataset& data, const std::vector<PolyTerm>& terms) {
  Dataset out = data;
  if (terms.empty()) return out;

  Eigen::Index extra = 0;
  for (const auto& t : terms) {
    if (t.exposure < 0 || t.exposure >= data.exposures.cols())
      throw ValidationError(errc::invalid_argument, "polynomial term: exposure index out of range");
    if (t.column < 0 || t.column >= data.covariates.cols())
      throw ValidationError(errc::invalid_argument, "polynomial term: covariate index out of range");
    if (t.degree < 2)
      throw ValidationError(errc::invalid_argument, "polynomial term: degree must be at least 2");
    extra += t.degree - 1;
  }

  const Eigen::Index base = data.covariates.cols();
  out.covariates.conservativeResize(Eigen::NoChange, base + extra);
  out.covariate_names.resize(static_cast<std::size_t>(base + extra));

  Eigen::Index next = base;
  for (const auto& t : terms) {
    const std::string stem = t.column < static_cast<int>(data.covariate_names.size())
                                 ? data.covariate_names[static_cast<std::size_t>(t.column)]
                                 : "c" + std::to_string(t.column);
    for (int power = 2; power <= t.degree; ++power) {
      out.covariates.col(next) = data.covariates.col(t.column).array().pow(power);
      out.covariate_names[static_cast<std::size_t>(next)] = stem + "^" + std::to_string(power);
      auto& set = out.confounder_sets[static_cast<std::size_t>(t.exposure)];
      if (std::find(set.begin(), set.end(), static_cast<int>(next)) == set.end())
        set.push_back(static_cast<int>(next));
      ++next;
    }
  }
  out.applied_transforms = terms;
  return out;
}

}  // namespace mvgps
