#include "mvgps/study.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "mvgps/balance.hpp"
#include "mvgps/dose_response.hpp"
#include "mvgps/entropy.hpp"
#include "mvgps/errors.hpp"
#include "mvgps/geometry.hpp"
#include "mvgps/gps.hpp"
#include "mvgps/simulation.hpp"

namespace mvgps {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const std::vector<std::string> kMetricNames = {"max_abs_corr", "avg_abs_corr", "ess",
                                               "total_abs_bias", "rmse"};
constexpr std::size_t kMetrics = 5;

struct MethodSpec {
  enum class Kind { mvgps, gps_uni, entropy, unweighted } kind;
  int index = 0;  // 0-based exposure for the single-exposure methods
};

MethodSpec parse_method(const std::string& tag, Eigen::Index m) {
  auto indexed = [&](const std::string& prefix,
                     MethodSpec::Kind kind) -> std::optional<MethodSpec> {
    if (tag.size() < prefix.size() + 3 || tag.compare(0, prefix.size() + 1, prefix + "(") != 0 ||
        tag.back() != ')')
      return std::nullopt;
    const std::string digits = tag.substr(prefix.size() + 1, tag.size() - prefix.size() - 2);
    int j = 0;
    for (char c : digits) {
      if (c < '0' || c > '9') return std::nullopt;
      j = j * 10 + (c - '0');
    }
    if (j < 1 || j > static_cast<int>(m))
      throw ValidationError(errc::invalid_argument,
                            "study: method " + tag + " indexes a missing exposure");
    return MethodSpec{kind, j - 1};
  };
  if (tag == "mvGPS") return {MethodSpec::Kind::mvgps, 0};
  if (tag == "unweighted") return {MethodSpec::Kind::unweighted, 0};
  if (auto spec = indexed("gps_uni", MethodSpec::Kind::gps_uni)) return *spec;
  if (auto spec = indexed("entropy", MethodSpec::Kind::entropy)) return *spec;
  throw ValidationError(errc::invalid_argument, "study: unknown method tag '" + tag + "'");
}

void validate_settings(const StudySettings& s) {
  if (s.scenarios.empty() || s.rho_grid.empty() || s.methods.empty() || s.trim_levels.empty())
    throw ValidationError(errc::invalid_argument, "study: empty grid list");
  if (s.B < 1) throw ValidationError(errc::invalid_argument, "study: B must be positive");
  if (s.n < 2) throw ValidationError(errc::invalid_argument, "study: n must be at least 2");
  if (s.grid_points < 1)
    throw ValidationError(errc::invalid_argument, "study: grid_points must be positive");
  if (s.jobs < 1) throw ValidationError(errc::invalid_argument, "study: jobs must be positive");
  for (double q : s.trim_levels)
    if (!(q > 0.5 && q <= 1.0))
      throw ValidationError(errc::invalid_trim, "study: trim level must lie in (0.5, 1]");
  for (const auto& name : s.scenarios)
    for (double rho : s.rho_grid) builtin_scenario(name, rho, s.n);  // throws on bad cells
}

// One repetition's metric block, NaN marking a failed entry.
using RepBlock = std::vector<double>;  // methods x trims x metrics, row-major

double& slot(RepBlock& block, std::size_t method, std::size_t trim, std::size_t metric,
             std::size_t n_trims) {
  return block[(method * n_trims + trim) * kMetrics + metric];
}

RepBlock run_repetition(const StudySettings& s, const std::vector<MethodSpec>& specs,
                        std::size_t scenario_idx, std::size_t rho_idx, int rep) {
  const std::size_t n_methods = specs.size();
  const std::size_t n_trims = s.trim_levels.size();
  RepBlock block(n_methods * n_trims * kMetrics, kNaN);

  const ScenarioConfig cfg = builtin_scenario(
      s.scenarios[scenario_idx], s.rho_grid[rho_idx], s.n);
  Rng rng = Rng::derive(s.master_seed, scenario_idx, rho_idx, static_cast<std::uint64_t>(rep));
  const Dataset data = generate(cfg, rng);

  std::vector<std::optional<WeightSet>> base(n_methods);
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    try {
      switch (specs[mi].kind) {
        case MethodSpec::Kind::mvgps:
          base[mi] = evaluate_weights(fit_mvgps(data), data);
          break;
        case MethodSpec::Kind::gps_uni:
          base[mi] = fit_univariate_gps(data, specs[mi].index);
          break;
        case MethodSpec::Kind::entropy:
          base[mi] = entropy_balance(data, specs[mi].index);
          break;
        case MethodSpec::Kind::unweighted:
          base[mi] = unit_weights(data.n());
          break;
      }
    } catch (const Error&) {
      // weight failure: every metric for this method stays NaN
    }
  }

  for (std::size_t ti = 0; ti < n_trims; ++ti) {
    const double q = s.trim_levels[ti];
    std::optional<Region> region;
    try {
      region = q < 1.0 ? trimmed_hull(data.exposures, q) : convex_hull(data.exposures);
    } catch (const Error&) {
      // degenerate hull: outcome metrics stay NaN for every method at this trim
    }
    std::optional<Eigen::MatrixXd> grid;
    if (region) {
      try {
        grid = region_grid(*region, s.grid_points);
      } catch (const Error&) {
      }
    }

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      if (!base[mi]) continue;
      try {
        const WeightSet trimmed = trim_weights(*base[mi], q);
        // Balance is scored on the full sample; outcome metrics on the
        // hull-restricted sample below.
        const BalanceReport report = balance_report(data, trimmed);
        slot(block, mi, ti, 0, n_trims) = report.max_abs_corr;
        slot(block, mi, ti, 1, n_trims) = report.avg_abs_corr;
        slot(block, mi, ti, 2, n_trims) = report.ess;
        if (!region || !grid) continue;
        const DoseResponseFit fit = fit_dose_response(data, trimmed, SurfaceFormula{}, *region);
        slot(block, mi, ti, 3, n_trims) = total_abs_bias(fit, cfg.alpha_d);
        const Eigen::VectorXd truth = *grid * cfg.alpha_d;
        const Eigen::VectorXd predicted = predict_surface(fit, *grid);
        slot(block, mi, ti, 4, n_trims) =
            std::sqrt((truth - predicted).squaredNorm() / static_cast<double>(grid->rows()));
      } catch (const Error&) {
        // whatever was written before the throw stands; the rest stays NaN
      }
    }
  }
  return block;
}

}  // namespace

StudyResult run_study(const StudySettings& settings) {
  validate_settings(settings);

  ScenarioConfig probe = builtin_scenario(settings.scenarios.front(), settings.rho_grid.front(),
                                          settings.n);
  std::vector<MethodSpec> specs;
  for (const auto& tag : settings.methods) specs.push_back(parse_method(tag, probe.beta.rows()));

  const std::size_t n_scen = settings.scenarios.size();
  const std::size_t n_rho = settings.rho_grid.size();
  const std::size_t n_methods = specs.size();
  const std::size_t n_trims = settings.trim_levels.size();
  const std::size_t reps = static_cast<std::size_t>(settings.B);
  const std::size_t items = n_scen * n_rho * reps;

  // Every repetition writes into its own preallocated slot; aggregation
  // afterwards is sequential in repetition order, so thread count and
  // scheduling cannot affect the result.
  std::vector<RepBlock> blocks(items);
  auto run_item = [&](std::size_t item) {
    const std::size_t scenario_idx = item / (n_rho * reps);
    const std::size_t rho_idx = (item / reps) % n_rho;
    const int rep = static_cast<int>(item % reps);
    try {
      blocks[item] = run_repetition(settings, specs, scenario_idx, rho_idx, rep);
    } catch (...) {
      blocks[item].assign(n_methods * n_trims * kMetrics, kNaN);
    }
  };

  const int jobs = std::min<int>(settings.jobs, static_cast<int>(items));
  if (jobs <= 1) {
    for (std::size_t item = 0; item < items; ++item) run_item(item);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t)
      workers.emplace_back([&] {
        for (std::size_t item = next.fetch_add(1); item < items; item = next.fetch_add(1))
          run_item(item);
      });
    for (auto& worker : workers) worker.join();
  }

  StudyResult result;
  for (std::size_t si = 0; si < n_scen; ++si) {
    for (std::size_t ri = 0; ri < n_rho; ++ri) {
      const ScenarioConfig cfg =
          builtin_scenario(settings.scenarios[si], settings.rho_grid[ri], settings.n);
      const double marginal_rho = implied_marginal_cov(cfg).second;
      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        for (std::size_t ti = 0; ti < n_trims; ++ti) {
          for (std::size_t metric = 0; metric < kMetrics; ++metric) {
            double sum = 0.0;
            int used = 0;
            for (std::size_t rep = 0; rep < reps; ++rep) {
              const double value = slot(blocks[(si * n_rho + ri) * reps + rep], mi, ti, metric,
                                        n_trims);
              if (std::isnan(value)) continue;
              sum += value;
              ++used;
            }
            StudyRow row;
            row.scenario = settings.scenarios[si];
            row.cond_rho = settings.rho_grid[ri];
            row.marginal_rho = marginal_rho;
            row.method = settings.methods[mi];
            row.trim_q = settings.trim_levels[ti];
            row.metric = kMetricNames[metric];
            row.reps = used;
            row.failures = settings.B - used;
            row.value = used > 0 ? sum / used : kNaN;
            if (row.failures * 10 > settings.B) {
              std::ostringstream flag;
              flag << "scenario=" << row.scenario << " cond_rho=" << row.cond_rho
                   << " method=" << row.method << " trim_q=" << row.trim_q
                   << " metric=" << row.metric << " failures=" << row.failures << "/"
                   << settings.B;
              result.flagged.push_back(flag.str());
            }
            result.rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return result;
}

}  // namespace mvgps
