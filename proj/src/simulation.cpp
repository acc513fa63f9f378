#include "mvgps/simulation.hpp"

#include <cmath>
#include <set>
#include <string>

#include "mvgps/errors.hpp"
#include "mvgps/mvn.hpp"

namespace mvgps {

namespace {

constexpr int kCovariates = 10;

ScenarioConfig base_scenario(double cond_rho, Eigen::Index n) {
  ScenarioConfig cfg;
  cfg.beta = Eigen::MatrixXd::Zero(2, kCovariates);
  cfg.alpha_x = Eigen::VectorXd::Zero(kCovariates);
  cfg.alpha_d = Eigen::Vector2d(1.0, 1.0);
  cfg.sigma_x = Eigen::MatrixXd::Constant(kCovariates, kCovariates, 0.2);
  cfg.sigma_x.diagonal().setOnes();
  cfg.cond_sd = Eigen::Vector2d(2.0, 2.0);
  cfg.cond_rho = cond_rho;
  cfg.sigma_y = 4.0;
  cfg.n = n;
  return cfg;
}

}  // namespace

void validate_scenario(const ScenarioConfig& cfg) {
  const Eigen::Index m = cfg.beta.rows();
  const Eigen::Index p = cfg.beta.cols();
  if (m < 1) throw ValidationError(errc::empty_exposure, "scenario: at least one exposure");
  if (cfg.alpha_x.size() != p)
    throw ValidationError(errc::shape_mismatch, "scenario: alpha_x length differs from beta columns");
  if (cfg.alpha_d.size() != m)
    throw ValidationError(errc::shape_mismatch, "scenario: alpha_d length differs from beta rows");
  if (cfg.sigma_x.rows() != p || cfg.sigma_x.cols() != p)
    throw ValidationError(errc::shape_mismatch, "scenario: sigma_x shape differs from beta columns");
  if (cfg.cond_sd.size() != m)
    throw ValidationError(errc::shape_mismatch, "scenario: cond_sd length differs from beta rows");
  if ((cfg.cond_sd.array() <= 0.0).any())
    throw ValidationError(errc::invalid_scale, "scenario: conditional SDs must be positive");
  // Compound-symmetric correlation is positive definite iff
  // cond_rho lies in (-1/(m-1), 1).
  const double lower = m > 1 ? -1.0 / static_cast<double>(m - 1) : -1.0;
  if (!(cfg.cond_rho > lower && cfg.cond_rho < 1.0))
    throw ValidationError(errc::invalid_argument,
                          "scenario: cond_rho outside the positive-definite range");
  if (cfg.sigma_y < 0.0)
    throw ValidationError(errc::invalid_scale, "scenario: sigma_y must be nonnegative");
  if (cfg.n < 1) throw ValidationError(errc::invalid_argument, "scenario: n must be positive");
  if (cfg.confounder_sets.size() != static_cast<std::size_t>(m))
    throw ValidationError(errc::shape_mismatch,
                          "scenario: confounder_sets size differs from exposure count");
  for (const auto& cset : cfg.confounder_sets)
    for (int col : cset)
      if (col < 0 || col >= p)
        throw ValidationError(errc::invalid_argument,
                              "scenario: confounder index " + std::to_string(col) + " out of range");
}

ScenarioConfig builtin_scenario(const std::string& name, double cond_rho, Eigen::Index n) {
  if (!(cond_rho > -1.0 && cond_rho < 1.0))
    throw ValidationError(errc::invalid_argument, "builtin_scenario: cond_rho must lie in (-1, 1)");
  ScenarioConfig cfg = base_scenario(cond_rho, n);
  cfg.name = name;
  if (name == "M1") {
    cfg.beta.row(0) << 1, 0.5, 0.25, 0.1, 0.75, 0, 0, 0, 0, 0;
    cfg.beta.row(1) << 0, 0, 0, 0, 0, 1, 0.5, 0.25, 0.1, 0.75;
    cfg.alpha_x << 0, 0.5, 0, 1, 0, 0.2, 0, 0, 1, 0;
    cfg.confounder_sets = {{1, 3}, {5, 8}};
  } else if (name == "M2") {
    cfg.beta.row(0) << 0, 0, 1, 0.5, 0.25, 0.1, 0.75, 0, 0, 0;
    cfg.beta.row(1) << 0, 0, 0, 0, 1, 0.5, 0.25, 0.1, 0.75, 0;
    cfg.alpha_x << 0, 0, 0.5, 0, 0, 1, 0.2, 0, 1, 0;
    cfg.confounder_sets = {{2, 5, 6}, {5, 6, 8}};
  } else if (name == "M3") {
    cfg.beta.row(0) << 1, 0.5, 0.25, 0.1, 0.75, 0, 0, 0, 0, 0;
    cfg.beta.row(1) << 0.8, 0.8, 0.05, 0.4, 0.55, 0, 0, 0, 0, 0;
    cfg.alpha_x << 0.5, 0, 1, 0.2, 1, 0, 0, 0, 0, 0;
    cfg.confounder_sets = {{0, 2, 3, 4}, {0, 2, 3, 4}};
  } else {
    throw ValidationError(errc::unknown_scenario, "builtin_scenario: unknown scenario " + name);
  }
  validate_scenario(cfg);
  return cfg;
}

Eigen::MatrixXd conditional_exposure_cov(const ScenarioConfig& cfg) {
  const Eigen::Index m = cfg.cond_sd.size();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Constant(m, m, cfg.cond_rho);
  corr.diagonal().setOnes();
  return cfg.cond_sd.asDiagonal() * corr * cfg.cond_sd.asDiagonal();
}

std::pair<Eigen::MatrixXd, double> implied_marginal_cov(const ScenarioConfig& cfg) {
  validate_scenario(cfg);
  const Eigen::MatrixXd sigma_d =
      conditional_exposure_cov(cfg) + cfg.beta * cfg.sigma_x * cfg.beta.transpose();
  double rho = 0.0;
  if (sigma_d.rows() > 1) rho = sigma_d(0, 1) / std::sqrt(sigma_d(0, 0) * sigma_d(1, 1));
  return {sigma_d, rho};
}

Dataset generate(const ScenarioConfig& cfg, Rng& rng) {
  validate_scenario(cfg);
  const Eigen::Index m = cfg.beta.rows();
  const Eigen::Index p = cfg.beta.cols();

  const Eigen::MatrixXd x =
      sample_mvn(Eigen::VectorXd::Zero(p), cfg.sigma_x, cfg.n, rng);
  Eigen::MatrixXd d =
      sample_mvn(Eigen::VectorXd::Zero(m), conditional_exposure_cov(cfg), cfg.n, rng);
  d += x * cfg.beta.transpose();
  Eigen::VectorXd y = x * cfg.alpha_x + d * cfg.alpha_d;
  for (Eigen::Index i = 0; i < cfg.n; ++i) y(i) += cfg.sigma_y * rng.normal();

  Dataset data;
  data.outcome = std::move(y);
  data.exposures = std::move(d);
  data.covariates = x;
  data.confounder_sets = cfg.confounder_sets;
  data.outcome_name = "y";
  for (Eigen::Index j = 0; j < m; ++j) data.exposure_names.push_back("d" + std::to_string(j + 1));
  for (Eigen::Index k = 0; k < p; ++k) data.covariate_names.push_back("x" + std::to_string(k + 1));
  return data;
}

PropensityFit population_propensity(const ScenarioConfig& cfg, Conditioning conditioning) {
  validate_scenario(cfg);
  const Eigen::Index m = cfg.beta.rows();
  const Eigen::Index p = cfg.beta.cols();

  // Joint covariance of (X, D): everything is zero-mean Gaussian, so every
  // conditional is a population regression read off this matrix.
  Eigen::MatrixXd joint(p + m, p + m);
  joint.topLeftCorner(p, p) = cfg.sigma_x;
  joint.topRightCorner(p, m) = cfg.sigma_x * cfg.beta.transpose();
  joint.bottomLeftCorner(m, p) = cfg.beta * cfg.sigma_x;
  joint.bottomRightCorner(m, m) =
      conditional_exposure_cov(cfg) + cfg.beta * cfg.sigma_x * cfg.beta.transpose();

  std::set<int> unions;
  for (const auto& cset : cfg.confounder_sets) unions.insert(cset.begin(), cset.end());

  // Population regression of `target` on `given`: coefficients from the
  // normal equations, residual SD from the Schur complement.
  auto conditional = [&](Eigen::Index target, const std::vector<Eigen::Index>& given) {
    LinearFit fit;
    const Eigen::Index g = static_cast<Eigen::Index>(given.size());
    Eigen::MatrixXd sgg(g, g);
    Eigen::VectorXd sgt(g);
    for (Eigen::Index a = 0; a < g; ++a) {
      sgt(a) = joint(given[static_cast<std::size_t>(a)], target);
      for (Eigen::Index b = 0; b < g; ++b)
        sgg(a, b) = joint(given[static_cast<std::size_t>(a)], given[static_cast<std::size_t>(b)]);
    }
    Eigen::VectorXd coef = g > 0 ? Eigen::VectorXd(sgg.ldlt().solve(sgt)) : Eigen::VectorXd(0);
    const double resid_var = joint(target, target) - (g > 0 ? coef.dot(sgt) : 0.0);
    if (!(resid_var > 0.0))
      throw NumericalError(errc::degenerate_density,
                           "population_propensity: zero conditional variance");
    fit.coefficients = Eigen::VectorXd::Zero(g + 1);  // intercept 0: all means are 0
    fit.coefficients.tail(g) = coef;
    fit.residual_sd = std::sqrt(resid_var);
    fit.design_rank = g + 1;
    return fit;
  };

  PropensityFit fit;
  for (Eigen::Index j = 0; j < m; ++j) {
    fit.order.push_back(static_cast<int>(j));
    const auto& own = cfg.confounder_sets[static_cast<std::size_t>(j)];
    std::vector<int> cset = conditioning == Conditioning::full
                                ? std::vector<int>(unions.begin(), unions.end())
                                : own;
    std::vector<Eigen::Index> den_given, num_given;
    for (int col : cset) den_given.push_back(col);
    for (Eigen::Index k = 0; k < j; ++k) {
      den_given.push_back(p + k);
      num_given.push_back(p + k);
    }
    fit.conditioning_sets.push_back(std::move(cset));
    fit.denominator_chain.push_back(conditional(p + j, den_given));
    fit.numerator_chain.push_back(conditional(p + j, num_given));
  }
  return fit;
}

}  // namespace mvgps
