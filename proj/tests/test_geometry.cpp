#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mvgps/errors.hpp"
#include "mvgps/geometry.hpp"
#include "mvgps/rng.hpp"
#include "mvgps/stats.hpp"

#include "helpers.hpp"

using namespace mvgps;
using testutil::Thrown;

namespace {

Eigen::MatrixXd random_points(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd pts(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    pts(i, 0) = rng.normal();
    pts(i, 1) = rng.normal();
  }
  return pts;
}

double polygon_area(const Eigen::MatrixXd& v) {
  double twice = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const Eigen::Index j = (i + 1) % v.rows();
    twice += v(i, 0) * v(j, 1) - v(j, 0) * v(i, 1);
  }
  return 0.5 * twice;
}

}  // namespace

TEST_CASE("bounding box takes per-dimension quantile bounds") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0.0, -1.0, 1.0, 0.0, 0.5, 2.0, 0.2, 0.5;
  const Region box = bounding_box(pts);
  CHECK(box.kind == RegionKind::box);
  CHECK(box.dimension == 2);
  CHECK(box.box_bounds(0, 0) == 0.0);
  CHECK(box.box_bounds(0, 1) == 1.0);
  CHECK(box.box_bounds(1, 0) == -1.0);
  CHECK(box.box_bounds(1, 1) == 2.0);
  CHECK_FALSE(box.trim_q.has_value());

  Eigen::MatrixXd column(8, 1);
  column << 1, 2, 3, 4, 5, 6, 7, 8;
  const Region trimmed = bounding_box(column, 0.75);
  CHECK(trimmed.box_bounds(0, 0) == 2.75);
  CHECK(trimmed.box_bounds(0, 1) == 6.25);
  CHECK(trimmed.box_bounds(0, 0) == sample_quantile(column.col(0), 1.0 - 0.75));
  CHECK(trimmed.box_bounds(0, 1) == sample_quantile(column.col(0), 0.75));
  CHECK(trimmed.trim_q.has_value());
  CHECK(*trimmed.trim_q == 0.75);

  CHECK_NOTHROW(bounding_box(column, 0.5));
  for (double bad : {0.4, 1.1, -0.2}) {
    const auto out = testutil::run_expecting([&] { bounding_box(column, bad); });
    CHECK(out.kind == Thrown::validation);
    CHECK(out.code == errc::invalid_trim);
  }
  const auto empty = testutil::run_expecting([&] { bounding_box(Eigen::MatrixXd(0, 2)); });
  CHECK(empty.kind == Thrown::validation);
  CHECK(empty.code == errc::empty_input);
}

TEST_CASE("convex hull returns the strict counter-clockwise vertex polygon") {
  Eigen::MatrixXd pts(6, 2);
  pts << 0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0, 1.0, 1.0, 0.5, 1.5;
  const Region hull = convex_hull(pts);
  CHECK(hull.kind == RegionKind::hull);
  CHECK(hull.dimension == 2);
  REQUIRE(hull.hull_vertices.rows() == 4);
  // Starts at the lexicographically smallest point, walks counter-clockwise.
  CHECK(hull.hull_vertices(0, 0) == 0.0);
  CHECK(hull.hull_vertices(0, 1) == 0.0);
  CHECK(hull.hull_vertices(1, 0) == 2.0);
  CHECK(hull.hull_vertices(1, 1) == 0.0);
  CHECK(hull.hull_vertices(2, 0) == 2.0);
  CHECK(hull.hull_vertices(2, 1) == 2.0);
  CHECK(hull.hull_vertices(3, 0) == 0.0);
  CHECK(hull.hull_vertices(3, 1) == 2.0);
  CHECK(polygon_area(hull.hull_vertices) == 4.0);
}

TEST_CASE("hull vertex sets match a brute-force oracle on random point clouds") {
  Rng rng(101);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index n = 5 + static_cast<Eigen::Index>(rng.uniform01() * 45.0);
    const Eigen::MatrixXd pts = random_points(rng, n);
    const Region hull = convex_hull(pts);
    const Eigen::MatrixXd& v = hull.hull_vertices;

    // Strictly convex counter-clockwise: every consecutive turn is left.
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const Eigen::Index j = (i + 1) % v.rows();
      const Eigen::Index k = (i + 2) % v.rows();
      const double turn = (v(j, 0) - v(i, 0)) * (v(k, 1) - v(i, 1)) -
                          (v(j, 1) - v(i, 1)) * (v(k, 0) - v(i, 0));
      CHECK(turn > 0.0);
    }

    const std::vector<int> oracle = testutil::hull_vertices_oracle(pts);
    REQUIRE(static_cast<Eigen::Index>(oracle.size()) == v.rows());
    std::set<std::pair<double, double>> expected, actual;
    for (int idx : oracle) expected.insert({pts(idx, 0), pts(idx, 1)});
    for (Eigen::Index i = 0; i < v.rows(); ++i) actual.insert({v(i, 0), v(i, 1)});
    CHECK(expected == actual);

    // The hull contains every input point (closed region).
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd p = pts.row(i);
      CHECK(contains(hull, p));
    }
  }
}

TEST_CASE("degenerate hull inputs are rejected") {
  Eigen::MatrixXd line(4, 2);
  line << 0.0, 0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0;
  auto out = testutil::run_expecting([&] { convex_hull(line); });
  CHECK(out.kind == Thrown::numerical);
  CHECK(out.code == errc::degenerate_hull);

  Eigen::MatrixXd repeated(4, 2);
  repeated << 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0;
  out = testutil::run_expecting([&] { convex_hull(repeated); });
  CHECK(out.kind == Thrown::numerical);
  CHECK(out.code == errc::degenerate_hull);

  out = testutil::run_expecting([&] { convex_hull(Eigen::MatrixXd::Zero(2, 2)); });
  CHECK(out.kind == Thrown::numerical);
  CHECK(out.code == errc::degenerate_hull);

  out = testutil::run_expecting([&] { convex_hull(Eigen::MatrixXd::Zero(5, 3)); });
  CHECK(out.kind == Thrown::validation);
  CHECK(out.code == errc::invalid_argument);
}

TEST_CASE("containment is closed on the boundary") {
  Eigen::MatrixXd pts(4, 2);
  pts << 0.0, 0.0, 2.0, 0.0, 2.0, 2.0, 0.0, 2.0;
  const Region hull = convex_hull(pts);

  auto point = [](double x, double y) {
    Eigen::VectorXd p(2);
    p << x, y;
    return p;
  };
  CHECK(contains(hull, point(0.0, 0.0)));   // vertex
  CHECK(contains(hull, point(1.0, 0.0)));   // edge midpoint
  CHECK(contains(hull, point(1.0, 1.0)));   // interior
  CHECK_FALSE(contains(hull, point(2.0 + 1e-6, 1.0)));
  CHECK_FALSE(contains(hull, point(-1e-6, 1.0)));

  const Region box = bounding_box(pts);
  CHECK(contains(box, point(0.0, 2.0)));
  CHECK_FALSE(contains(box, point(0.0, 2.0 + 1e-9)));

  const auto out = testutil::run_expecting([&] { contains(box, Eigen::VectorXd::Zero(3)); });
  CHECK(out.kind == Thrown::validation);
  CHECK(out.code == errc::shape_mismatch);
}

TEST_CASE("trimmed constructions nest inside the untrimmed ones") {
  const auto data = testutil::make_scenario_data("M1", 0.3, 300, 21);
  const Eigen::MatrixXd& d = data.exposures;

  const Region g = bounding_box(d);
  const Region gq = bounding_box(d, 0.9);
  for (Eigen::Index j = 0; j < 2; ++j) {
    CHECK(gq.box_bounds(j, 0) >= g.box_bounds(j, 0));
    CHECK(gq.box_bounds(j, 1) <= g.box_bounds(j, 1));
  }

  const Region h = convex_hull(d);
  const Region hq = trimmed_hull(d, 0.9);
  CHECK(hq.trim_q.has_value());
  CHECK(*hq.trim_q == 0.9);
  REQUIRE(hq.hull_vertices.rows() >= 3);
  for (Eigen::Index i = 0; i < hq.hull_vertices.rows(); ++i) {
    const Eigen::VectorXd v = hq.hull_vertices.row(i);
    CHECK(contains(h, v));
    CHECK(contains(gq, v));
  }

  // q = 1 trims nothing: identical vertex matrix, no trim_q.
  const Region h1 = trimmed_hull(d, 1.0);
  CHECK_FALSE(h1.trim_q.has_value());
  REQUIRE(h1.hull_vertices.rows() == h.hull_vertices.rows());
  CHECK((h1.hull_vertices - h.hull_vertices).cwiseAbs().maxCoeff() == 0.0);

  // Aggressive trimming can leave too few points.
  Eigen::MatrixXd tiny(4, 2);
  tiny << 0.0, 0.0, 10.0, 0.0, 0.0, 10.0, 10.0, 10.0;
  const auto out = testutil::run_expecting([&] { trimmed_hull(tiny, 0.6); });
  CHECK(out.kind == Thrown::numerical);
  CHECK(out.code == errc::degenerate_hull);
}

TEST_CASE("region grid is an exact-count deterministic lattice subsample") {
  Region unit;
  unit.kind = RegionKind::box;
  unit.dimension = 2;
  unit.box_bounds.resize(2, 2);
  unit.box_bounds << 0.0, 1.0, 0.0, 1.0;

  SUBCASE("frozen rows on the unit square") {
    const Eigen::MatrixXd grid = region_grid(unit, 10);
    REQUIRE(grid.rows() == 10);
    REQUIRE(grid.cols() == 2);
    // 32x32 lattice, 1024 interior points, subsample index floor(i*1024/10);
    // row i maps to lattice cell (t / 32, t % 32) with coordinates t_j / 31.
    CHECK(grid(0, 0) == 0.0);
    CHECK(grid(0, 1) == 0.0);
    CHECK(grid(1, 0) == 3.0 / 31.0);   // t = 102 = 3*32 + 6
    CHECK(grid(1, 1) == 6.0 / 31.0);
    CHECK(grid(5, 0) == 16.0 / 31.0);  // t = 512 = 16*32 + 0
    CHECK(grid(5, 1) == 0.0);
    CHECK(grid(9, 0) == 28.0 / 31.0);  // t = 921 = 28*32 + 25
    CHECK(grid(9, 1) == 25.0 / 31.0);
  }

  SUBCASE("lattice refinement doubles until the target is reachable") {
    const Eigen::MatrixXd grid = region_grid(unit, 5000);
    REQUIRE(grid.rows() == 5000);
    CHECK(grid.minCoeff() >= 0.0);
    CHECK(grid.maxCoeff() <= 1.0);
    // 32^2 and 64^2 are too small, 128^2 suffices: coordinates are j/127.
    CHECK(grid(0, 0) == 0.0);
    CHECK(grid(4999, 0) == 1.0);
    CHECK(grid(4999, 1) == 124.0 / 127.0);
    const Eigen::MatrixXd again = region_grid(unit, 5000);
    CHECK((grid - again).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("hull grids stay inside the hull") {
    const auto data = testutil::make_scenario_data("M1", 0.0, 200, 33);
    const Region hull = convex_hull(data.exposures);
    const Eigen::MatrixXd grid = region_grid(hull, 500);
    REQUIRE(grid.rows() == 500);
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
      const Eigen::VectorXd p = grid.row(i);
      CHECK(contains(hull, p));
    }
  }

  SUBCASE("one-dimensional boxes work") {
    Region seg;
    seg.kind = RegionKind::box;
    seg.dimension = 1;
    seg.box_bounds.resize(1, 2);
    seg.box_bounds << 0.0, 10.0;
    const Eigen::MatrixXd grid = region_grid(seg, 7);
    REQUIRE(grid.rows() == 7);
    REQUIRE(grid.cols() == 1);
    CHECK(grid(0, 0) == 0.0);
    CHECK(grid(1, 0) == 10.0 * 4.0 / 31.0);  // floor(1*32/7) = 4
    CHECK(grid(6, 0) == 10.0 * 27.0 / 31.0);  // floor(6*32/7) = 27
  }

  SUBCASE("degenerate and invalid grids are rejected") {
    Region flat = unit;
    flat.box_bounds(1, 1) = 0.0;  // zero extent in dimension 2
    auto out = testutil::run_expecting([&] { region_grid(flat, 10); });
    CHECK(out.kind == Thrown::numerical);
    CHECK(out.code == errc::degenerate_region);

    out = testutil::run_expecting([&] { region_grid(unit, 0); });
    CHECK(out.kind == Thrown::validation);
    CHECK(out.code == errc::invalid_argument);

    Region wide;
    wide.kind = RegionKind::box;
    wide.dimension = 7;
    wide.box_bounds = Eigen::MatrixXd::Zero(7, 2);
    wide.box_bounds.col(1).setOnes();
    out = testutil::run_expecting([&] { region_grid(wide, 10); });
    CHECK(out.kind == Thrown::validation);
    CHECK(out.code == errc::invalid_argument);
  }
}
