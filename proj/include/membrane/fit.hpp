#pragma once

#include <cstddef>
#include <vector>

namespace membrane {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 1;
  std::size_t n = 0;

  double at(double x) const { return intercept + slope * x; }
};

/// Ordinary least-squares line. Throws on n < 2 or zero x variance.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Continuous piecewise-linear model with fixed knots:
///   f(x) = beta0 + beta1*x + sum_j beta(2+j) * max(0, x - knot_j)
struct PiecewiseLinearFit {
  std::vector<double> knots;  // ascending
  std::vector<double> beta;   // size knots.size() + 2
  double sse = 0;

  double value(double x) const;
  /// Slope of segment i (segment 0 lies left of the first knot).
  double segment_slope(std::size_t i) const;
  /// Extended line (slope, intercept at x = 0) of segment i.
  LineFit segment_line(std::size_t i) const;
};

/// Least-squares fit of the continuous piecewise-linear model to (x, y) with
/// x ascending and knots fixed. Throws if a segment holds fewer than two points.
PiecewiseLinearFit fit_piecewise_linear(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::vector<double>& knots);

/// Solves the symmetric positive-definite system G b = rhs in place.
/// Gaussian elimination with partial pivoting; throws if singular.
std::vector<double> solve_dense(std::vector<std::vector<double>> g,
                                std::vector<double> rhs);

}  // namespace membrane
