#include "membrane/segment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace membrane {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Least-squares objective for a continuous piecewise-linear model evaluated
/// in O(k^2) per knot vector via prefix moments of the (sorted) data. The
/// basis is {1, x, max(0, x - k_j)}; all Gram entries reduce to range sums of
/// 1, x, x^2, y, xy over suffixes that start at each knot.
class PiecewiseObjective {
 public:
  PiecewiseObjective(const std::vector<double>& x, const std::vector<double>& y)
      : x_(x), n_(x.size()), sx_(n_ + 1, 0.0), sxx_(n_ + 1, 0.0), sy_(n_ + 1, 0.0),
        sxy_(n_ + 1, 0.0), syy_(n_ + 1, 0.0) {
    // Center y to cut cancellation in the SSE = sum(y^2) - beta.rhs step.
    ymean_ = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      const double yc = y[i] - ymean_;
      sx_[i + 1] = sx_[i] + x[i];
      sxx_[i + 1] = sxx_[i] + x[i] * x[i];
      sy_[i + 1] = sy_[i] + yc;
      sxy_[i + 1] = sxy_[i] + x[i] * yc;
      syy_[i + 1] = syy_[i] + yc * yc;
    }
  }

  std::size_t size() const { return n_; }

  /// First index with x > k.
  std::size_t upper(double k) const {
    return static_cast<std::size_t>(
        std::upper_bound(x_.begin(), x_.end(), k) - x_.begin());
  }

  /// True when every segment delimited by the knots holds >= min_pts points.
  bool valid(const std::vector<double>& knots, int min_pts) const {
    std::size_t prev = 0;
    for (double k : knots) {
      const std::size_t i = upper(k);
      if (i < prev + static_cast<std::size_t>(min_pts)) {
        return false;
      }
      prev = i;
    }
    return n_ >= prev + static_cast<std::size_t>(min_pts);
  }

  /// Residual sum of squares of the best continuous piecewise-linear fit with
  /// the given ascending knots; +inf when the normal equations are singular.
  double sse(const std::vector<double>& knots) const {
    const std::size_t k = knots.size();
    const std::size_t p = k + 2;
    std::vector<std::vector<double>> g(p, std::vector<double>(p, 0.0));
    std::vector<double> rhs(p, 0.0);
    const double fn = static_cast<double>(n_);
    g[0][0] = fn;
    g[0][1] = sx_[n_];
    g[1][1] = sxx_[n_];
    rhs[0] = sy_[n_];
    rhs[1] = sxy_[n_];
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t a = upper(knots[j]);
      const double cnt = static_cast<double>(n_ - a);
      const double rsx = sx_[n_] - sx_[a];
      const double rsxx = sxx_[n_] - sxx_[a];
      g[0][2 + j] = rsx - knots[j] * cnt;
      g[1][2 + j] = rsxx - knots[j] * rsx;
      rhs[2 + j] = (sxy_[n_] - sxy_[a]) - knots[j] * (sy_[n_] - sy_[a]);
      for (std::size_t m = 0; m <= j; ++m) {
        // Both hinge terms are nonzero only past the later knot j.
        g[2 + m][2 + j] =
            rsxx - (knots[m] + knots[j]) * rsx + knots[m] * knots[j] * cnt;
      }
    }
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        g[a][b] = g[b][a];
      }
    }
    try {
      const std::vector<double> beta = solve_dense(std::move(g), rhs);
      double dot = 0;
      for (std::size_t i = 0; i < p; ++i) {
        dot += beta[i] * rhs[i];
      }
      return std::max(0.0, syy_[n_] - dot);
    } catch (const std::runtime_error&) {
      return kInf;
    }
  }

 private:
  const std::vector<double>& x_;
  std::size_t n_;
  double ymean_ = 0;
  std::vector<double> sx_, sxx_, sy_, sxy_, syy_;
};

struct RefineOutcome {
  double sse = kInf;
  std::vector<double> knots;
};

/// Coordinate descent over grid candidates, then a golden-section polish of
/// each knot within one grid step. Ties prefer the smaller strain.
RefineOutcome refine_knots(const PiecewiseObjective& obj,
                           const std::vector<double>& grid,
                           std::vector<double> knots, const SegmentConfig& cfg) {
  RefineOutcome out;
  if (!obj.valid(knots, cfg.min_region_points)) {
    return out;
  }
  const std::size_t k = knots.size();
  double cur = obj.sse(knots);
  std::vector<double> trial = knots;

  for (int sweep = 0; sweep < 20; ++sweep) {
    bool moved = false;
    for (std::size_t j = 0; j < k; ++j) {
      const double lo = j > 0 ? knots[j - 1] : -kInf;
      const double hi = j + 1 < k ? knots[j + 1] : kInf;
      double best = cur;
      double best_k = knots[j];
      trial = knots;
      for (double g : grid) {
        if (g <= lo) {
          continue;
        }
        if (g >= hi) {
          break;
        }
        trial[j] = g;
        if (!obj.valid(trial, cfg.min_region_points)) {
          continue;
        }
        const double s = obj.sse(trial);
        if (s < best || (s == best && g < best_k)) {
          best = s;
          best_k = g;
        }
      }
      if (best_k != knots[j]) {
        knots[j] = best_k;
        cur = best;
        moved = true;
      }
    }
    if (!moved) {
      break;
    }
  }

  const double step = grid.size() > 1 ? grid[1] - grid[0] : 0.0;
  const double span = grid.back() - grid.front();
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int round = 0; round < 2 && step > 0; ++round) {
    for (std::size_t j = 0; j < k; ++j) {
      trial = knots;
      auto eval = [&](double t) {
        trial[j] = t;
        return obj.valid(trial, cfg.min_region_points) ? obj.sse(trial) : kInf;
      };
      double a = std::max(knots[j] - step, j > 0 ? knots[j - 1] : grid.front());
      double b = std::min(knots[j] + step, j + 1 < k ? knots[j + 1] : grid.back());
      if (!(b > a)) {
        continue;
      }
      double c = b - invphi * (b - a);
      double d = a + invphi * (b - a);
      double fc = eval(c);
      double fd = eval(d);
      for (int it = 0; it < 80 && (b - a) > 1e-12 * span; ++it) {
        if (fc <= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - invphi * (b - a);
          fc = eval(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + invphi * (b - a);
          fd = eval(d);
        }
      }
      const double t_best = fc <= fd ? c : d;
      const double s_best = eval(t_best);
      if (s_best < cur) {
        knots[j] = t_best;
        cur = s_best;
      }
    }
  }

  out.sse = cur;
  out.knots = std::move(knots);
  return out;
}

std::vector<std::pair<double, double>> sorted_by_strain(
    const StressStrainCurve& curve) {
  std::vector<std::pair<double, double>> pts;
  pts.reserve(curve.points.size());
  for (const CurvePoint& p : curve.points) {
    pts.emplace_back(p.strain, p.stress_bar);
  }
  std::stable_sort(pts.begin(), pts.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return pts;
}

}  // namespace

DerivativeProfile smooth_and_differentiate(const StressStrainCurve& curve,
                                           const SmoothConfig& cfg) {
  const std::size_t n = curve.points.size();
  if (n < 16) {
    throw std::runtime_error("smooth_and_differentiate: need at least 16 points, got " +
                             std::to_string(n));
  }
  if (cfg.grid_points < 8) {
    throw std::invalid_argument("smooth_and_differentiate: grid_points must be >= 8");
  }
  const auto pts = sorted_by_strain(curve);
  DerivativeProfile prof;
  prof.src_strain.reserve(n);
  prof.src_stress.reserve(n);
  for (const auto& [x, y] : pts) {
    prof.src_strain.push_back(x);
    prof.src_stress.push_back(y);
  }
  const double x0 = prof.src_strain.front();
  const double x1 = prof.src_strain.back();
  const double span = x1 - x0;
  if (!(span > 1e-6)) {
    throw std::runtime_error("smooth_and_differentiate: strain range degenerate (" +
                             std::to_string(span) + ")");
  }

  const std::size_t grid_n = static_cast<std::size_t>(cfg.grid_points);
  const double h0 = cfg.bandwidth_frac * span;
  constexpr std::size_t kMinWindow = 8;
  prof.strain.resize(grid_n);
  prof.stress.resize(grid_n);
  prof.d1.resize(grid_n);
  prof.d2.resize(grid_n);

  const auto& xs = prof.src_strain;
  const auto& ys = prof.src_stress;
  for (std::size_t gi = 0; gi < grid_n; ++gi) {
    const double g =
        x0 + span * static_cast<double>(gi) / static_cast<double>(grid_n - 1);
    prof.strain[gi] = g;

    auto lo_it = std::lower_bound(xs.begin(), xs.end(), g - h0);
    auto hi_it = std::upper_bound(xs.begin(), xs.end(), g + h0);
    std::size_t lo = static_cast<std::size_t>(lo_it - xs.begin());
    std::size_t hi = static_cast<std::size_t>(hi_it - xs.begin());
    double h = h0;
    if (hi - lo < kMinWindow) {
      // Too sparse under the nominal bandwidth: widen to the 8 nearest points.
      while (hi - lo < kMinWindow) {
        const double dl = lo > 0 ? g - xs[lo - 1] : kInf;
        const double dr = hi < n ? xs[hi] - g : kInf;
        if (dl <= dr) {
          --lo;
        } else {
          ++hi;
        }
      }
      double far = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        far = std::max(far, std::abs(xs[i] - g));
      }
      h = std::max(1.5 * far, 1e-12 * span);
    }

    // Weighted moments in the scaled coordinate t = (x - g) / h.
    double m[7] = {0, 0, 0, 0, 0, 0, 0};
    double v[4] = {0, 0, 0, 0};
    for (std::size_t i = lo; i < hi; ++i) {
      const double t = (xs[i] - g) / h;
      const double au = std::abs(t);
      if (au >= 1.0) {
        continue;
      }
      const double w1 = 1.0 - au * au * au;
      const double w = w1 * w1 * w1;
      double tp = w;
      for (int kpow = 0; kpow <= 6; ++kpow) {
        if (kpow <= 3) {
          v[kpow] += tp * ys[i];
        }
        m[kpow] += tp;
        tp *= t;
      }
    }

    // Fit the highest polynomial order the window supports.
    double c0 = 0, c1 = 0, c2 = 0;
    bool solved = false;
    for (int order = 3; order >= 1 && !solved; --order) {
      const std::size_t p = static_cast<std::size_t>(order) + 1;
      std::vector<std::vector<double>> gm(p, std::vector<double>(p));
      std::vector<double> rhs(p);
      for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = 0; b < p; ++b) {
          gm[a][b] = m[a + b];
        }
        rhs[a] = v[a];
      }
      try {
        const std::vector<double> c = solve_dense(std::move(gm), rhs);
        c0 = c[0];
        c1 = p > 1 ? c[1] : 0.0;
        c2 = p > 2 ? c[2] : 0.0;
        solved = true;
      } catch (const std::runtime_error&) {
        continue;
      }
    }
    if (!solved) {
      // Degenerate window (e.g. all points at one strain): weighted mean.
      double sw = 0, swy = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        sw += 1.0;
        swy += ys[i];
      }
      c0 = sw > 0 ? swy / sw : 0.0;
      c1 = c2 = 0.0;
    }
    prof.stress[gi] = c0;
    prof.d1[gi] = c1 / h;
    prof.d2[gi] = 2.0 * c2 / (h * h);
  }
  return prof;
}

std::vector<double> find_breakpoints(const DerivativeProfile& profile, int n_break,
                                     const SegmentConfig& cfg) {
  if (n_break != 2 && n_break != 3) {
    throw std::invalid_argument("find_breakpoints: n_break must be 2 or 3, got " +
                                std::to_string(n_break));
  }
  const std::vector<double>& gx = profile.strain;
  const std::vector<double>& sx = profile.src_strain;
  const std::vector<double>& sy = profile.src_stress;
  const std::size_t need =
      static_cast<std::size_t>(cfg.min_region_points) *
      static_cast<std::size_t>(n_break + 1);
  if (gx.size() < 8 || sx.size() < need || sx.size() != sy.size()) {
    throw SegmentationError("segmentation failure: too few points for " +
                            std::to_string(n_break + 1) + " regions");
  }
  const double span = gx.back() - gx.front();
  PiecewiseObjective obj(sx, sy);

  const auto [ymin_it, ymax_it] = std::minmax_element(sy.begin(), sy.end());
  const double yrange = *ymax_it - *ymin_it;
  const double sse_line = obj.sse({});
  const double sse_floor =
      1e-18 * yrange * yrange * static_cast<double>(sx.size());
  if (sse_line <= sse_floor) {
    throw SegmentationError(
        "segmentation failure: curve is a single line within numerical noise");
  }

  // Seed candidates at isolated curvature peaks away from the boundary.
  const std::size_t grid_n = gx.size();
  const std::size_t trim = static_cast<std::size_t>(
      std::llround(cfg.boundary_trim_frac * static_cast<double>(grid_n)));
  const auto [smin_it, smax_it] =
      std::minmax_element(profile.stress.begin(), profile.stress.end());
  const double mag_floor =
      cfg.peak_floor_frac * (*smax_it - *smin_it) / (span * span);
  struct Peak {
    double strain;
    double mag;
  };
  std::vector<Peak> peaks;
  const std::size_t i_lo = std::max<std::size_t>(trim, 1);
  const std::size_t i_hi = grid_n - std::max<std::size_t>(trim, 1);
  for (std::size_t i = i_lo; i < i_hi && i + 1 < grid_n; ++i) {
    const double mag = std::abs(profile.d2[i]);
    if (mag >= std::abs(profile.d2[i - 1]) && mag >= std::abs(profile.d2[i + 1]) &&
        mag >= mag_floor) {
      peaks.push_back({gx[i], mag});
    }
  }
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.mag != b.mag) {
      return a.mag > b.mag;
    }
    return a.strain < b.strain;
  });
  const double min_sep = cfg.peak_min_separation_frac * span;
  std::vector<double> picked;
  for (const Peak& p : peaks) {
    if (static_cast<int>(picked.size()) == n_break) {
      break;
    }
    bool isolated = true;
    for (double q : picked) {
      if (std::abs(p.strain - q) < min_sep) {
        isolated = false;
        break;
      }
    }
    if (isolated) {
      picked.push_back(p.strain);
    }
  }
  std::sort(picked.begin(), picked.end());

  // Seed list: curvature peaks, peaks padded with uniform fill, uniform
  // index quantiles. The quantile seed is always valid, so refinement always
  // has somewhere to start.
  std::vector<std::vector<double>> seeds;
  if (static_cast<int>(picked.size()) == n_break) {
    seeds.push_back(picked);
  } else if (!picked.empty()) {
    std::vector<double> hybrid = picked;
    for (int j = 1; j <= n_break && static_cast<int>(hybrid.size()) < n_break; ++j) {
      const double u = gx.front() + span * static_cast<double>(j) /
                                        static_cast<double>(n_break + 1);
      bool clear = true;
      for (double q : hybrid) {
        if (std::abs(u - q) < 0.5 * min_sep) {
          clear = false;
          break;
        }
      }
      if (clear) {
        hybrid.push_back(u);
      }
    }
    if (static_cast<int>(hybrid.size()) == n_break) {
      std::sort(hybrid.begin(), hybrid.end());
      seeds.push_back(hybrid);
    }
  }
  {
    std::vector<double> quant;
    for (int j = 1; j <= n_break; ++j) {
      const std::size_t idx =
          sx.size() * static_cast<std::size_t>(j) /
          static_cast<std::size_t>(n_break + 1);
      quant.push_back(sx[std::min(idx, sx.size() - 1)]);
    }
    std::sort(quant.begin(), quant.end());
    seeds.push_back(std::move(quant));
  }

  // Coordinate descent moves one knot at a time, so a seed whose knots all sit
  // in one true segment can settle into a joint local minimum (seen when the
  // yield bend is shallow next to the densification bend). A brute scan over
  // coarse knot tuples is cheap with O(1) segment SSE; the best few tuples
  // join the seed list and give the descent a start in the right basin.
  {
    std::vector<double> coarse;
    const std::size_t stride = std::max<std::size_t>(1, grid_n / 48);
    for (std::size_t i = trim; i < grid_n - trim; i += stride) {
      coarse.push_back(gx[i]);
    }
    std::vector<std::pair<double, std::vector<double>>> scored;
    std::vector<double> tuple(static_cast<std::size_t>(n_break));
    const std::size_t m = coarse.size();
    auto scan = [&](auto&& self, std::size_t depth, std::size_t start) -> void {
      if (depth == tuple.size()) {
        if (obj.valid(tuple, cfg.min_region_points)) {
          scored.emplace_back(obj.sse(tuple), tuple);
        }
        return;
      }
      for (std::size_t i = start; i < m; ++i) {
        tuple[depth] = coarse[i];
        self(self, depth + 1, i + 1);
      }
    };
    scan(scan, 0, 0);
    std::sort(scored.begin(), scored.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < scored.size() && i < 3; ++i) {
      seeds.push_back(scored[i].second);
    }
  }

  RefineOutcome best;
  for (const auto& seed : seeds) {
    RefineOutcome r = refine_knots(obj, gx, seed, cfg);
    if (r.sse < best.sse) {
      best = std::move(r);
    }
  }
  if (!std::isfinite(best.sse)) {
    throw SegmentationError("segmentation failure: no feasible breakpoint placement");
  }
  if (sse_line - best.sse < cfg.min_line_improvement * sse_line) {
    const double pct = sse_line > 0 ? 100.0 * (sse_line - best.sse) / sse_line : 0.0;
    throw SegmentationError(
        "segmentation failure: piecewise fit improves on a single line by only " +
        std::to_string(pct) + "%");
  }
  return best.knots;
}

std::string to_string(RegionLabel label) {
  switch (label) {
    case RegionLabel::elastic: return "elastic";
    case RegionLabel::plateau: return "plateau";
    case RegionLabel::densification: return "densification";
    case RegionLabel::creep: return "creep";
  }
  return "unknown";
}

RegionLabel region_label_from_string(const std::string& s) {
  for (RegionLabel l : {RegionLabel::elastic, RegionLabel::plateau,
                        RegionLabel::densification, RegionLabel::creep}) {
    if (s == to_string(l)) {
      return l;
    }
  }
  throw std::invalid_argument("unknown region label: " + s);
}

const RegionFit* SegmentationResult::region(RegionLabel label) const {
  for (const RegionFit& r : regions) {
    if (r.label == label) {
      return &r;
    }
  }
  return nullptr;
}

std::optional<std::size_t> detect_creep_start(const StressStrainCurve& curve,
                                              const SegmentConfig& cfg) {
  const std::size_t n = curve.points.size();
  if (n < 24) {
    return std::nullopt;
  }
  const double t0 = curve.points.front().time_s;
  const double t1 = curve.points.back().time_s;
  const double duration = t1 - t0;
  const double max_stress = curve.max_stress();
  if (!(duration > 0) || !(max_stress > 0)) {
    return std::nullopt;
  }

  // Moving average knocks instrument noise out of the spread test.
  constexpr std::size_t kHalf = 4;
  std::vector<double> filt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = i >= kHalf ? i - kHalf : 0;
    const std::size_t b = std::min(n, i + kHalf + 1);
    double s = 0;
    for (std::size_t j = a; j < b; ++j) {
      s += curve.points[j].stress_bar;
    }
    filt[i] = s / static_cast<double>(b - a);
  }

  std::vector<double> suf_max(n), suf_min(n);
  suf_max[n - 1] = suf_min[n - 1] = filt[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    suf_max[i] = std::max(filt[i], suf_max[i + 1]);
    suf_min[i] = std::min(filt[i], suf_min[i + 1]);
  }
  const double tol = cfg.creep_stress_frac * max_stress;
  std::size_t start = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (suf_max[i] - suf_min[i] < tol) {
      start = i;
      break;
    }
  }
  if (start >= n) {
    return std::nullopt;
  }
  if (!(t1 - curve.points[start].time_s > cfg.creep_time_frac * duration)) {
    return std::nullopt;
  }
  if (start < 16 || n - start < 4) {
    return std::nullopt;
  }
  return start;
}

SegmentationResult segment_curve(const StressStrainCurve& curve,
                                 const SegmentConfig& cfg) {
  if (curve.points.size() < 16) {
    throw std::invalid_argument("segment_curve: need at least 16 points, got " +
                                std::to_string(curve.points.size()));
  }
  const std::optional<std::size_t> creep_start = detect_creep_start(curve, cfg);

  StressStrainCurve loading = curve;
  if (creep_start) {
    loading.points.assign(curve.points.begin(),
                          curve.points.begin() + static_cast<long>(*creep_start));
    if (loading.points.size() < 16) {
      throw SegmentationError(
          "segmentation failure: constant-stress hold leaves too few loading points");
    }
  }

  const DerivativeProfile prof = smooth_and_differentiate(loading, cfg.smooth);
  const std::vector<double> knots = find_breakpoints(prof, 2, cfg);
  const PiecewiseLinearFit pw =
      fit_piecewise_linear(prof.src_strain, prof.src_stress, knots);

  SegmentationResult res;
  res.sample_id = curve.sample_id;
  res.position_index = curve.position_index;
  res.breakpoints = knots;
  res.flags = curve.flags;

  const auto& xs = prof.src_strain;
  const auto& ys = prof.src_stress;
  const std::size_t n = xs.size();
  std::size_t seg_begin = 0;
  const RegionLabel labels[3] = {RegionLabel::elastic, RegionLabel::plateau,
                                 RegionLabel::densification};
  for (std::size_t seg = 0; seg < 3; ++seg) {
    const std::size_t seg_end =
        seg < 2 ? static_cast<std::size_t>(
                      std::upper_bound(xs.begin(), xs.end(), knots[seg]) - xs.begin())
                : n;
    RegionFit fit;
    fit.label = labels[seg];
    fit.strain_begin = seg == 0 ? xs.front() : knots[seg - 1];
    fit.strain_end = seg < 2 ? knots[seg] : xs.back();
    fit.line = pw.segment_line(seg);
    fit.line.n = seg_end - seg_begin;
    double sse = 0, sst = 0, mean = 0;
    for (std::size_t i = seg_begin; i < seg_end; ++i) {
      mean += ys[i];
    }
    if (seg_end > seg_begin) {
      mean /= static_cast<double>(seg_end - seg_begin);
    }
    for (std::size_t i = seg_begin; i < seg_end; ++i) {
      const double r = ys[i] - fit.line.at(xs[i]);
      const double d = ys[i] - mean;
      sse += r * r;
      sst += d * d;
    }
    fit.line.r_squared = sst > 0 ? std::clamp(1.0 - sse / sst, 0.0, 1.0) : 1.0;
    res.regions.push_back(fit);
    seg_begin = seg_end;
  }

  const double elastic_slope = res.regions[0].line.slope;
  const double plateau_slope = res.regions[1].line.slope;
  const double dens_slope = res.regions[2].line.slope;
  if (!(elastic_slope > plateau_slope && dens_slope > plateau_slope)) {
    res.flags.insert(CurveFlag::slope_order_violation);
  }
  if (res.regions[0].line.r_squared < cfg.min_r2 ||
      res.regions[2].line.r_squared < cfg.min_r2) {
    res.flags.insert(CurveFlag::low_r2);
  }
  const double loading_span = xs.back() - xs.front();
  if (knots[1] - knots[0] < cfg.plateau_min_frac * loading_span) {
    res.flags.insert(CurveFlag::no_plateau);
  }

  if (creep_start) {
    std::vector<double> ct, ce;
    double strain_end = xs.back();
    for (std::size_t i = *creep_start; i < curve.points.size(); ++i) {
      ct.push_back(curve.points[i].time_s);
      ce.push_back(curve.points[i].strain);
      strain_end = std::max(strain_end, curve.points[i].strain);
    }
    RegionFit creep;
    creep.label = RegionLabel::creep;
    creep.strain_begin = xs.back();
    creep.strain_end = strain_end;
    creep.line = fit_line(ct, ce);  // strain versus time during the hold
    res.regions.push_back(creep);
    res.has_creep = true;
    res.creep_start_time = curve.points[*creep_start].time_s;
    res.breakpoints.push_back(curve.points[*creep_start].strain);
  }
  return res;
}

nlohmann::json to_json(const SegmentationResult& result) {
  nlohmann::json regions = nlohmann::json::array();
  for (const RegionFit& r : result.regions) {
    regions.push_back({{"label", to_string(r.label)},
                       {"strain_begin", r.strain_begin},
                       {"strain_end", r.strain_end},
                       {"slope", r.line.slope},
                       {"intercept", r.line.intercept},
                       {"r_squared", r.line.r_squared},
                       {"point_count", r.line.n}});
  }
  nlohmann::json flags = nlohmann::json::array();
  for (CurveFlag f : result.flags) {
    flags.push_back(to_string(f));
  }
  return {{"sample_id", result.sample_id},
          {"position_index", result.position_index},
          {"breakpoints", result.breakpoints},
          {"has_creep", result.has_creep},
          {"creep_start_time", result.creep_start_time},
          {"flags", flags},
          {"regions", regions}};
}

SegmentationResult segmentation_from_json(const nlohmann::json& j) {
  SegmentationResult res;
  res.sample_id = j.at("sample_id").get<std::string>();
  res.position_index = j.at("position_index").get<int>();
  res.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  res.has_creep = j.at("has_creep").get<bool>();
  res.creep_start_time = j.at("creep_start_time").get<double>();
  for (const auto& f : j.at("flags")) {
    res.flags.insert(flag_from_string(f.get<std::string>()));
  }
  for (const auto& r : j.at("regions")) {
    RegionFit fit;
    fit.label = region_label_from_string(r.at("label").get<std::string>());
    fit.strain_begin = r.at("strain_begin").get<double>();
    fit.strain_end = r.at("strain_end").get<double>();
    fit.line.slope = r.at("slope").get<double>();
    fit.line.intercept = r.at("intercept").get<double>();
    fit.line.r_squared = r.at("r_squared").get<double>();
    fit.line.n = r.at("point_count").get<std::size_t>();
    res.regions.push_back(fit);
  }
  return res;
}

}  // namespace membrane
