#include "membrane/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace membrane {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_line: length mismatch");
  }
  const std::size_t n = x.size();
  if (n < 2) {
    throw std::invalid_argument("fit_line: need at least 2 points");
  }
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0)) {
    throw std::invalid_argument("fit_line: zero variance in x");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n = n;
  if (syy > 0) {
    const double sse = syy - fit.slope * sxy;
    fit.r_squared = std::clamp(1.0 - sse / syy, 0.0, 1.0);
  } else {
    fit.r_squared = 1.0;  // constant y reproduced exactly
  }
  return fit;
}

double PiecewiseLinearFit::value(double x) const {
  double v = beta[0] + beta[1] * x;
  for (std::size_t j = 0; j < knots.size(); ++j) {
    if (x > knots[j]) {
      v += beta[2 + j] * (x - knots[j]);
    }
  }
  return v;
}

double PiecewiseLinearFit::segment_slope(std::size_t i) const {
  double s = beta[1];
  for (std::size_t j = 0; j < i && j < knots.size(); ++j) {
    s += beta[2 + j];
  }
  return s;
}

LineFit PiecewiseLinearFit::segment_line(std::size_t i) const {
  LineFit line;
  line.slope = segment_slope(i);
  double intercept = beta[0];
  for (std::size_t j = 0; j < i && j < knots.size(); ++j) {
    intercept -= beta[2 + j] * knots[j];
  }
  line.intercept = intercept;
  return line;
}

std::vector<double> solve_dense(std::vector<std::vector<double>> g,
                                std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(g[r][col]) > std::abs(g[pivot][col])) {
        pivot = r;
      }
    }
    if (std::abs(g[pivot][col]) < 1e-300) {
      throw std::runtime_error("solve_dense: singular system");
    }
    std::swap(g[col], g[pivot]);
    std::swap(rhs[col], rhs[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = g[r][col] / g[col][col];
      if (f == 0) {
        continue;
      }
      for (std::size_t c = col; c < n; ++c) {
        g[r][c] -= f * g[col][c];
      }
      rhs[r] -= f * rhs[col];
    }
  }
  std::vector<double> out(n);
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t c = i + 1; c < n; ++c) {
      v -= g[i][c] * out[c];
    }
    out[i] = v / g[i][i];
  }
  return out;
}

PiecewiseLinearFit fit_piecewise_linear(const std::vector<double>& x,
                                        const std::vector<double>& y,
                                        const std::vector<double>& knots) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("fit_piecewise_linear: length mismatch");
  }
  const std::size_t n = x.size();
  const std::size_t k = knots.size();
  const std::size_t p = k + 2;
  if (n < p) {
    throw std::invalid_argument("fit_piecewise_linear: too few points");
  }
  for (std::size_t j = 1; j < k; ++j) {
    if (!(knots[j] > knots[j - 1])) {
      throw std::invalid_argument("fit_piecewise_linear: knots not ascending");
    }
  }

  std::vector<double> phi(p);
  std::vector<std::vector<double>> g(p, std::vector<double>(p, 0.0));
  std::vector<double> rhs(p, 0.0);
  double syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    phi[0] = 1.0;
    phi[1] = x[i];
    for (std::size_t j = 0; j < k; ++j) {
      phi[2 + j] = x[i] > knots[j] ? x[i] - knots[j] : 0.0;
    }
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = a; b < p; ++b) {
        g[a][b] += phi[a] * phi[b];
      }
      rhs[a] += phi[a] * y[i];
    }
    syy += y[i] * y[i];
  }
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      g[a][b] = g[b][a];
    }
  }

  PiecewiseLinearFit fit;
  fit.knots = knots;
  fit.beta = solve_dense(g, rhs);
  double dot = 0;
  for (std::size_t a = 0; a < p; ++a) {
    dot += fit.beta[a] * rhs[a];
  }
  fit.sse = std::max(0.0, syy - dot);
  return fit;
}

}  // namespace membrane
