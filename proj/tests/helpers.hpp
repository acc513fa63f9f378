#pragma once

#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mvgps/dataset.hpp"
#include "mvgps/errors.hpp"
#include "mvgps/rng.hpp"
#include "mvgps/simulation.hpp"

namespace testutil {

inline mvgps::Dataset make_scenario_data(const std::string& name, double rho, Eigen::Index n,
                                         std::uint64_t seed) {
  mvgps::Rng rng(seed);
  return mvgps::generate(mvgps::builtin_scenario(name, rho, n), rng);
}

// Runs f and reports which error code it threw, if any.
enum class Thrown { nothing, validation, numerical, other };

struct Outcome {
  Thrown kind = Thrown::nothing;
  mvgps::errc code{};
  std::string message;
};

inline Outcome run_expecting(const std::function<void()>& f) {
  Outcome out;
  try {
    f();
  } catch (const mvgps::ValidationError& e) {
    out = {Thrown::validation, e.code(), e.what()};
  } catch (const mvgps::NumericalError& e) {
    out = {Thrown::numerical, e.code(), e.what()};
  } catch (const std::exception& e) {
    out = {Thrown::other, mvgps::errc::io_error, e.what()};
  }
  return out;
}

// Plain unweighted Pearson correlation, written out directly so library
// results are checked against an independent computation.
inline double plain_pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  const double mx = x.mean(), my = y.mean();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sxy += (x(i) - mx) * (y(i) - my);
    sxx += (x(i) - mx) * (x(i) - mx);
    syy += (y(i) - my) * (y(i) - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Hull-membership oracle independent of the geometry module: fan the
// polygon into triangles from vertex 0 and test each with sign areas.
inline bool in_hull_oracle(const Eigen::MatrixXd& vertices, double px, double py, double tol) {
  auto side = [](double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
  };
  for (Eigen::Index i = 1; i + 1 < vertices.rows(); ++i) {
    const double ax = vertices(0, 0), ay = vertices(0, 1);
    const double bx = vertices(i, 0), by = vertices(i, 1);
    const double cx = vertices(i + 1, 0), cy = vertices(i + 1, 1);
    const double s1 = side(ax, ay, bx, by, px, py);
    const double s2 = side(bx, by, cx, cy, px, py);
    const double s3 = side(cx, cy, ax, ay, px, py);
    if (s1 >= -tol && s2 >= -tol && s3 >= -tol) return true;
  }
  return false;
}

// Brute-force hull vertex set: (i, j) is a hull edge when every other point
// lies strictly to its left; a vertex is any edge endpoint. Cubic time,
// valid for points in general position (random continuous draws).
inline std::vector<int> hull_vertices_oracle(const Eigen::MatrixXd& pts) {
  const Eigen::Index n = pts.rows();
  std::vector<bool> on_hull(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      bool edge = true;
      for (Eigen::Index k = 0; k < n && edge; ++k) {
        if (k == i || k == j) continue;
        const double cross = (pts(j, 0) - pts(i, 0)) * (pts(k, 1) - pts(i, 1)) -
                             (pts(j, 1) - pts(i, 1)) * (pts(k, 0) - pts(i, 0));
        edge = cross > 0.0;
      }
      if (edge) {
        on_hull[static_cast<std::size_t>(i)] = true;
        on_hull[static_cast<std::size_t>(j)] = true;
      }
    }
  std::vector<int> out;
  for (Eigen::Index i = 0; i < n; ++i)
    if (on_hull[static_cast<std::size_t>(i)]) out.push_back(static_cast<int>(i));
  return out;
}

// Scratch directory removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("mvgps_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream buffer;
  buffer << f.rdbuf();
  return buffer.str();
}

}  // namespace testutil
