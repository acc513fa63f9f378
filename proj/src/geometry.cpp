#include "mvgps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mvgps/errors.hpp"
#include "mvgps/stats.hpp"

namespace mvgps {

namespace {

double cross(const Eigen::Vector2d& origin, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - origin.x()) * (b.y() - origin.y()) -
         (a.y() - origin.y()) * (b.x() - origin.x());
}

// Relative tolerance for cross products, which scale as coordinate^2.
double cross_tolerance(double coordinate_scale) {
  const double s = std::max(1.0, coordinate_scale);
  return 1e-12 * s * s;
}

void require_hull_input(const Eigen::MatrixXd& exposures) {
  if (exposures.cols() != 2)
    throw ValidationError(errc::invalid_argument,
                          "convex_hull: defined for exactly two exposures");
  if (exposures.rows() < 3)
    throw NumericalError(errc::degenerate_hull, "convex_hull: fewer than 3 points");
}

}  // namespace

Region bounding_box(const Eigen::MatrixXd& exposures, double q) {
  if (exposures.rows() < 1)
    throw ValidationError(errc::empty_input, "bounding_box: no points");
  if (!(q >= 0.5 && q <= 1.0))
    throw ValidationError(errc::invalid_trim, "bounding_box: q must lie in [0.5, 1]");
  Region region;
  region.kind = RegionKind::box;
  region.dimension = static_cast<int>(exposures.cols());
  region.box_bounds.resize(exposures.cols(), 2);
  for (Eigen::Index j = 0; j < exposures.cols(); ++j) {
    region.box_bounds(j, 0) = sample_quantile(exposures.col(j), 1.0 - q);
    region.box_bounds(j, 1) = sample_quantile(exposures.col(j), q);
  }
  if (q < 1.0) region.trim_q = q;
  return region;
}

Region convex_hull(const Eigen::MatrixXd& exposures) {
  require_hull_input(exposures);

  std::vector<Eigen::Vector2d> pts(static_cast<std::size_t>(exposures.rows()));
  for (Eigen::Index i = 0; i < exposures.rows(); ++i) pts[static_cast<std::size_t>(i)] = exposures.row(i);
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) { return a.x() == b.x() && a.y() == b.y(); }),
            pts.end());
  if (pts.size() < 3)
    throw NumericalError(errc::degenerate_hull, "convex_hull: fewer than 3 distinct points");

  // Monotone chain with strict turns: collinear candidates are popped, so
  // the vertex list is strictly convex.
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower_end = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower_end && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);  // last point repeats the first
  if (hull.size() < 3)
    throw NumericalError(errc::degenerate_hull, "convex_hull: input points are collinear");

  Region region;
  region.kind = RegionKind::hull;
  region.dimension = 2;
  region.hull_vertices.resize(static_cast<Eigen::Index>(hull.size()), 2);
  for (std::size_t i = 0; i < hull.size(); ++i)
    region.hull_vertices.row(static_cast<Eigen::Index>(i)) = hull[i];
  return region;
}

Region trimmed_hull(const Eigen::MatrixXd& exposures, double q) {
  require_hull_input(exposures);
  const Region box = bounding_box(exposures, q);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < exposures.rows(); ++i) {
    const Eigen::VectorXd row = exposures.row(i);
    if (contains(box, row)) keep.push_back(i);
  }
  Eigen::MatrixXd retained(static_cast<Eigen::Index>(keep.size()), 2);
  for (std::size_t i = 0; i < keep.size(); ++i) retained.row(static_cast<Eigen::Index>(i)) = exposures.row(keep[i]);
  if (retained.rows() < 3)
    throw NumericalError(errc::degenerate_hull,
                         "trimmed_hull: fewer than 3 points remain after trimming");
  Region region = convex_hull(retained);
  if (q < 1.0) region.trim_q = q;
  return region;
}

bool contains(const Region& region, const Eigen::VectorXd& point) {
  if (point.size() != region.dimension)
    throw ValidationError(errc::shape_mismatch, "contains: point dimension " +
                                                    std::to_string(point.size()) +
                                                    " does not match region dimension " +
                                                    std::to_string(region.dimension));
  if (region.kind == RegionKind::box) {
    for (Eigen::Index j = 0; j < point.size(); ++j)
      if (point(j) < region.box_bounds(j, 0) || point(j) > region.box_bounds(j, 1)) return false;
    return true;
  }
  const Eigen::MatrixXd& v = region.hull_vertices;
  const double scale =
      std::max(v.cwiseAbs().maxCoeff(), point.cwiseAbs().maxCoeff());
  const double tol = cross_tolerance(scale);
  const Eigen::Index k = v.rows();
  const Eigen::Vector2d p(point(0), point(1));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::Vector2d a = v.row(i);
    const Eigen::Vector2d b = v.row((i + 1) % k);
    if (cross(a, b, p) < -tol) return false;
  }
  return true;
}

Eigen::MatrixXd region_grid(const Region& region, Eigen::Index target_count) {
  if (target_count < 1)
    throw ValidationError(errc::invalid_argument, "region_grid: target count must be positive");
  const int m = region.dimension;
  if (m < 1 || m > 6)
    throw ValidationError(errc::invalid_argument,
                          "region_grid: supported for 1 to 6 dimensions");

  Eigen::MatrixXd bounds(m, 2);
  if (region.kind == RegionKind::box) {
    bounds = region.box_bounds;
  } else {
    bounds.col(0) = region.hull_vertices.colwise().minCoeff();
    bounds.col(1) = region.hull_vertices.colwise().maxCoeff();
  }
  for (int j = 0; j < m; ++j)
    if (!(bounds(j, 1) > bounds(j, 0)))
      throw NumericalError(errc::degenerate_region,
                           "region_grid: region has zero extent in dimension " +
                               std::to_string(j + 1));

  for (Eigen::Index per_axis = 32; per_axis <= 8192; per_axis *= 2) {
    std::vector<Eigen::VectorXd> inside;
    Eigen::VectorXd point(m);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(m), 0);
    // Row-major odometer: last axis varies fastest.
    while (true) {
      for (int j = 0; j < m; ++j)
        point(j) = bounds(j, 0) + (bounds(j, 1) - bounds(j, 0)) *
                                      static_cast<double>(idx[static_cast<std::size_t>(j)]) /
                                      static_cast<double>(per_axis - 1);
      if (contains(region, point)) inside.push_back(point);
      int axis = m - 1;
      while (axis >= 0 && ++idx[static_cast<std::size_t>(axis)] == per_axis) {
        idx[static_cast<std::size_t>(axis)] = 0;
        --axis;
      }
      if (axis < 0) break;
    }
    const Eigen::Index k = static_cast<Eigen::Index>(inside.size());
    if (k < target_count) continue;
    // Uniform deterministic subsample: floor(i * k / target) strictly
    // increases for k >= target, so exactly target_count points return.
    Eigen::MatrixXd grid(target_count, m);
    for (Eigen::Index i = 0; i < target_count; ++i)
      grid.row(i) = inside[static_cast<std::size_t>((i * k) / target_count)];
    return grid;
  }
  throw NumericalError(errc::degenerate_region,
                       "region_grid: lattice refinement exhausted without enough interior points");
}

}  // namespace mvgps
