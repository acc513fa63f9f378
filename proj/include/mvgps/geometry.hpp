#pragma once

#include <Eigen/Dense>
#include <optional>

namespace mvgps {

enum class RegionKind { box, hull };

// Estimable exposure region: an axis-aligned box in any dimension, or a
// strictly convex counter-clockwise polygon (two exposures only). Regions
// are closed: boundary points count as inside. trim_q records the quantile
// used to trim the construction, when any.
struct Region {
  RegionKind kind = RegionKind::box;
  int dimension = 0;
  Eigen::MatrixXd box_bounds;     // dimension x 2 columns [lo, hi]; box only
  Eigen::MatrixXd hull_vertices;  // k x 2, counter-clockwise, no three collinear; hull only
  std::optional<double> trim_q;
};

// Per-dimension [Q(d_j, 1-q), Q(d_j, q)] bounds; q = 1 gives observed
// min/max. q must lie in [0.5, 1].
Region bounding_box(const Eigen::MatrixXd& exposures, double q = 1.0);

// Minimal convex polygon containing all points (monotone chain). Requires
// at least 3 distinct, not all collinear points: a zero-area region would
// make the dose-response surface unidentifiable.
Region convex_hull(const Eigen::MatrixXd& exposures);

// Convex hull of the points inside bounding_box(exposures, q).
Region trimmed_hull(const Eigen::MatrixXd& exposures, double q);

// Closed membership test (boundary inclusive).
bool contains(const Region& region, const Eigen::VectorXd& point);

// Deterministic grid of exactly target_count points inside the region: a
// regular lattice over the region's bounding box (32 points per axis,
// doubling until enough lattice points fall inside), then uniform
// subsampling in row-major order. No randomness; identical output on
// every call and platform.
Eigen::MatrixXd region_grid(const Region& region, Eigen::Index target_count);

}  // namespace mvgps
