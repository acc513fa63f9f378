#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvgps/dose_response.hpp"
#include "mvgps/errors.hpp"
#include "mvgps/geometry.hpp"
#include "mvgps/gps.hpp"
#include "mvgps/stats.hpp"

#include "helpers.hpp"

using namespace mvgps;
using testutil::Thrown;

namespace {

// Scenario exposures with a deterministic outcome substituted in, so the
// regression truth is known exactly.
Dataset with_outcome(Dataset data, const std::function<double(double, double)>& f) {
  for (Eigen::Index i = 0; i < data.n(); ++i)
    data.outcome(i) = f(data.exposures(i, 0), data.exposures(i, 1));
  return data;
}

}  // namespace

TEST_CASE("noise-free linear surfaces are recovered exactly") {
  const Dataset data = with_outcome(testutil::make_scenario_data("M1", 0.0, 50, 5),
                                    [](double d1, double d2) { return 2.0 + d1 + d2; });
  const Region hull = convex_hull(data.exposures);
  const DoseResponseFit fit =
      fit_dose_response(data, unit_weights(data.n()), SurfaceFormula{}, hull);

  CHECK(fit.n_retained == 50);  // own points always lie in their own hull
  CHECK(fit.term_names == std::vector<std::string>{"intercept", "d1", "d2"});
  CHECK(fit.coefficients.coefficients(0) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(fit.coefficients.coefficients(1) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.coefficients.coefficients(2) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fit.coefficients.exact_fit);
  CHECK(fit.coefficients.residual_sd == 0.0);
  CHECK(fit.weight_tag == "unweighted");
  CHECK(fit.n_exposures == 2);

  Eigen::VectorXd alpha(2);
  alpha << 1.2, 0.7;
  CHECK(total_abs_bias(fit, alpha) == doctest::Approx(0.5).epsilon(1e-8));

  const Eigen::MatrixXd probe = data.exposures.topRows(5);
  const Eigen::VectorXd predicted = predict_surface(fit, probe);
  for (Eigen::Index i = 0; i < 5; ++i)
    CHECK(predicted(i) == doctest::Approx(2.0 + probe(i, 0) + probe(i, 1)).epsilon(1e-10));
}

TEST_CASE("interaction and quadratic terms extend the design in a fixed order") {
  const Dataset data = testutil::make_scenario_data("M1", 0.0, 80, 11);
  const Region hull = convex_hull(data.exposures);

  SUBCASE("pairwise interaction") {
    const Dataset di = with_outcome(data, [](double d1, double d2) {
      return 1.0 + d1 + 2.0 * d2 + 0.5 * d1 * d2;
    });
    SurfaceFormula formula;
    formula.interaction = true;
    const DoseResponseFit fit = fit_dose_response(di, unit_weights(80), formula, hull);
    CHECK(fit.term_names == std::vector<std::string>{"intercept", "d1", "d2", "d1*d2"});
    CHECK(fit.coefficients.coefficients(0) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fit.coefficients.coefficients(1) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fit.coefficients.coefficients(2) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(fit.coefficients.coefficients(3) == doctest::Approx(0.5).epsilon(1e-8));
  }

  SUBCASE("quadratic powers") {
    const Dataset dq = with_outcome(data, [](double d1, double d2) {
      return 0.5 + d1 - d2 + 0.25 * d1 * d1 + 0.1 * d2 * d2;
    });
    SurfaceFormula formula;
    formula.degree = 2;
    const DoseResponseFit fit = fit_dose_response(dq, unit_weights(80), formula, hull);
    CHECK(fit.term_names ==
          std::vector<std::string>{"intercept", "d1", "d2", "d1^2", "d2^2"});
    CHECK(fit.coefficients.coefficients(3) == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(fit.coefficients.coefficients(4) == doctest::Approx(0.1).epsilon(1e-8));
    // Linear terms keep their slots, so the bias metric stays comparable.
    Eigen::VectorXd alpha(2);
    alpha << 1.0, -1.0;
    CHECK(total_abs_bias(fit, alpha) < 1e-8);
  }
}

TEST_CASE("only units inside the region enter the fit") {
  const Dataset data = testutil::make_scenario_data("M1", 0.3, 300, 17);
  const WeightSet ws = evaluate_weights(fit_mvgps(data), data);
  const Region region = trimmed_hull(data.exposures, 0.9);

  Eigen::Index inside = 0;
  std::vector<double> kept;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const Eigen::VectorXd p = data.exposures.row(i);
    if (contains(region, p)) {
      ++inside;
      kept.push_back(ws.weights(i));
    }
  }
  REQUIRE(inside < 300);

  const DoseResponseFit fit = fit_dose_response(data, ws, SurfaceFormula{}, region);
  CHECK(fit.n_retained == inside);
  Eigen::VectorXd kept_w = Eigen::Map<Eigen::VectorXd>(kept.data(),
                                                       static_cast<Eigen::Index>(kept.size()));
  CHECK(fit.ess_retained == doctest::Approx(effective_sample_size(kept_w)).epsilon(1e-12));
  CHECK(fit.trim_q == ws.trim_q);
}

TEST_CASE("rmse against the population surface is a grid-wise error") {
  const Dataset data = with_outcome(testutil::make_scenario_data("M1", 0.0, 60, 23),
                                    [](double d1, double d2) { return 3.0 + d1 + d2; });
  const Region hull = convex_hull(data.exposures);
  const DoseResponseFit fit =
      fit_dose_response(data, unit_weights(data.n()), SurfaceFormula{}, hull);

  Eigen::VectorXd alpha(2);
  alpha << 1.0, 1.0;
  // The fitted surface differs from alpha^T d by the constant 3 everywhere.
  CHECK(rmse_on_region(fit, alpha, hull, 200) == doctest::Approx(3.0).epsilon(1e-8));

  const Dataset flat = with_outcome(data, [](double d1, double d2) { return d1 + d2; });
  const DoseResponseFit exact =
      fit_dose_response(flat, unit_weights(flat.n()), SurfaceFormula{}, hull);
  CHECK(rmse_on_region(exact, alpha, hull, 200) < 1e-8);
}

TEST_CASE("support, extrapolation, and shape failures carry their codes") {
  const Dataset data = testutil::make_scenario_data("M1", 0.0, 100, 29);
  const Region hull = convex_hull(data.exposures);

  SUBCASE("too few units inside the region") {
    Region tiny;
    tiny.kind = RegionKind::box;
    tiny.dimension = 2;
    tiny.box_bounds.resize(2, 2);
    tiny.box_bounds << 0.0, 1e-9, 0.0, 1e-9;
    const auto out = testutil::run_expecting(
        [&] { fit_dose_response(data, unit_weights(100), SurfaceFormula{}, tiny); });
    CHECK(out.kind == Thrown::numerical);
    CHECK(out.code == errc::insufficient_support);
  }

  SUBCASE("prediction outside the region is refused") {
    const DoseResponseFit fit =
        fit_dose_response(data, unit_weights(100), SurfaceFormula{}, hull);
    Eigen::MatrixXd outside(1, 2);
    outside << data.exposures.col(0).maxCoeff() + 10.0, 0.0;
    const auto out = testutil::run_expecting([&] { predict_surface(fit, outside); });
    CHECK(out.kind == Thrown::numerical);
    CHECK(out.code == errc::extrapolation);
    CHECK(out.message.find("outside") != std::string::npos);

    CHECK(testutil::run_expecting([&] { predict_surface(fit, Eigen::MatrixXd::Zero(1, 3)); })
              .code == errc::shape_mismatch);
  }

  SUBCASE("metric truth vectors must match the exposure count") {
    const DoseResponseFit fit =
        fit_dose_response(data, unit_weights(100), SurfaceFormula{}, hull);
    const auto bias = testutil::run_expecting([&] { total_abs_bias(fit, Eigen::VectorXd::Ones(3)); });
    CHECK(bias.kind == Thrown::validation);
    CHECK(bias.code == errc::metric_undefined);
    const auto rmse = testutil::run_expecting(
        [&] { rmse_on_region(fit, Eigen::VectorXd::Ones(1), hull, 100); });
    CHECK(rmse.kind == Thrown::validation);
    CHECK(rmse.code == errc::metric_undefined);
  }

  SUBCASE("input validation") {
    Dataset no_outcome = data;
    no_outcome.outcome.resize(0);
    CHECK(testutil::run_expecting(
              [&] { fit_dose_response(no_outcome, unit_weights(100), SurfaceFormula{}, hull); })
              .kind == Thrown::validation);

    CHECK(testutil::run_expecting(
              [&] { fit_dose_response(data, unit_weights(99), SurfaceFormula{}, hull); })
              .code == errc::shape_mismatch);

    Region seg;
    seg.kind = RegionKind::box;
    seg.dimension = 1;
    seg.box_bounds.resize(1, 2);
    seg.box_bounds << -100.0, 100.0;
    CHECK(testutil::run_expecting(
              [&] { fit_dose_response(data, unit_weights(100), SurfaceFormula{}, seg); })
              .code == errc::shape_mismatch);

    SurfaceFormula bad;
    bad.degree = 0;
    CHECK(testutil::run_expecting(
              [&] { fit_dose_response(data, unit_weights(100), bad, hull); })
              .code == errc::invalid_argument);
  }
}
