#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mvgps/errors.hpp"

namespace mvgps {

// Weighted-moment substrate. Free functions templated on Eigen expressions:
// any vector expression (column view, array op, map) is accepted without
// materializing. All weighted moments are weight-normalized, so every result
// is invariant to rescaling the weights by a positive constant.

template <typename W>
void validate_weights(const Eigen::MatrixBase<W>& w) {
  if (w.size() == 0) throw ValidationError(errc::empty_input, "weights: empty vector");
  double total = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double wi = w(i);
    if (!std::isfinite(wi) || wi < 0.0)
      throw ValidationError(errc::degenerate_weights,
                            "weights: entry " + std::to_string(i) + " is negative or non-finite");
    total += wi;
  }
  if (total <= 0.0) throw ValidationError(errc::degenerate_weights, "weights: all entries are zero");
}

template <typename V, typename W>
double weighted_mean(const Eigen::MatrixBase<V>& x, const Eigen::MatrixBase<W>& w) {
  if (x.size() != w.size())
    throw ValidationError(errc::shape_mismatch, "weighted_mean: value/weight lengths differ");
  validate_weights(w);
  double sw = 0.0, sx = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sw += w(i);
    sx += w(i) * x(i);
  }
  return sx / sw;
}

// Weighted covariance about weighted means (normalized by the weight total).
template <typename X, typename Y, typename W>
double weighted_covariance(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<Y>& y,
                           const Eigen::MatrixBase<W>& w) {
  if (x.size() != y.size() || x.size() != w.size())
    throw ValidationError(errc::shape_mismatch, "weighted_covariance: input lengths differ");
  const double mx = weighted_mean(x, w);
  const double my = weighted_mean(y, w);
  double sw = 0.0, sxy = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    sw += w(i);
    sxy += w(i) * (x(i) - mx) * (y(i) - my);
  }
  return sxy / sw;
}

template <typename X, typename Y, typename W>
double weighted_pearson(const Eigen::MatrixBase<X>& x, const Eigen::MatrixBase<Y>& y,
                        const Eigen::MatrixBase<W>& w) {
  const double vx = weighted_covariance(x, x, w);
  const double vy = weighted_covariance(y, y, w);
  if (vx <= 0.0 || vy <= 0.0)
    throw NumericalError(errc::undefined_correlation,
                         "weighted_pearson: zero weighted variance, correlation undefined");
  const double r = weighted_covariance(x, y, w) / std::sqrt(vx * vy);
  return std::clamp(r, -1.0, 1.0);
}

// Kish effective sample size (sum w)^2 / sum w^2; in (0, n], equals n iff
// all weights are equal.
template <typename W>
double effective_sample_size(const Eigen::MatrixBase<W>& w) {
  validate_weights(w);
  double s1 = 0.0, s2 = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    s1 += w(i);
    s2 += w(i) * w(i);
  }
  return s1 * s1 / s2;
}

// Sample quantile with linear interpolation between order statistics at
// 0-based index h = (n-1)p. Q(x,0) = min, Q(x,1) = max.
template <typename V>
double sample_quantile(const Eigen::MatrixBase<V>& x, double p) {
  if (x.size() == 0) throw ValidationError(errc::empty_input, "sample_quantile: empty vector");
  if (!(p >= 0.0 && p <= 1.0))
    throw ValidationError(errc::invalid_argument, "sample_quantile: p must lie in [0,1]");
  std::vector<double> sorted(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) sorted[static_cast<std::size_t>(i)] = x(i);
  std::sort(sorted.begin(), sorted.end());
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double normal_pdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError(errc::invalid_scale, "normal_pdf: sd must be positive");
  const double z = (x - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

inline double log_normal_pdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw ValidationError(errc::invalid_scale, "log_normal_pdf: sd must be positive");
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

}  // namespace mvgps
