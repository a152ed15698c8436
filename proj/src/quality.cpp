#include "membrane/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "membrane/props.hpp"

namespace membrane {
namespace {

/// Strictly increasing (stress, strain) envelope of one curve: running max of
/// stress in time order, keeping the first strain that reaches each new max.
struct Envelope {
  std::vector<double> stress;
  std::vector<double> strain;
  bool reduced = false;  ///< true when non-monotone stress was clamped

  double min_stress() const { return stress.front(); }
  double max_stress() const { return stress.back(); }

  double strain_at(double sigma) const {
    auto it = std::lower_bound(stress.begin(), stress.end(), sigma);
    if (it == stress.begin()) {
      return strain.front();
    }
    if (it == stress.end()) {
      return strain.back();
    }
    const std::size_t j = static_cast<std::size_t>(it - stress.begin());
    const double s0 = stress[j - 1], s1 = stress[j];
    const double t = (sigma - s0) / (s1 - s0);
    return strain[j - 1] + t * (strain[j] - strain[j - 1]);
  }
};

Envelope make_envelope(const StressStrainCurve& curve) {
  if (curve.points.empty()) {
    throw std::invalid_argument("empty curve (" + curve.sample_id + ")");
  }
  Envelope env;
  double run_max = -std::numeric_limits<double>::infinity();
  const double tol = 1e-12 * std::max(1.0, std::abs(curve.max_stress()));
  for (const CurvePoint& p : curve.points) {
    if (p.stress_bar > run_max) {
      run_max = p.stress_bar;
      env.stress.push_back(p.stress_bar);
      env.strain.push_back(p.strain);
    } else if (p.stress_bar < run_max - tol) {
      env.reduced = true;
    }
  }
  return env;
}

double cv_with_normalization(const std::vector<StressStrainCurve>& curves,
                             const QualityConfig& cfg, StdNormalization norm,
                             ConsistencyReport* report) {
  const StressGrid grid = common_stress_axis(curves, cfg);
  const std::size_t k = curves.size();

  std::vector<Envelope> envs;
  envs.reserve(k);
  for (const StressStrainCurve& c : curves) {
    Envelope env = make_envelope(c);
    if (report != nullptr && env.reduced) {
      (*report).per_curve_flags[c.position_index].insert(
          CurveFlag::non_monotone_stress);
    }
    envs.push_back(std::move(env));
  }

  double std_sum = 0;
  double grand_sum = 0;
  for (int i = 0; i < grid.n; ++i) {
    const double sigma = grid.value(i);
    double mean = 0;
    std::vector<double> strains(k);
    for (std::size_t c = 0; c < k; ++c) {
      strains[c] = envs[c].strain_at(sigma);
      mean += strains[c];
    }
    mean /= static_cast<double>(k);
    double ss = 0;
    for (double e : strains) {
      ss += (e - mean) * (e - mean);
    }
    const double div = norm == StdNormalization::sample
                           ? static_cast<double>(k - 1)
                           : static_cast<double>(k);
    std_sum += std::sqrt(ss / div);
    grand_sum += mean;
  }
  const double mean_std = std_sum / static_cast<double>(grid.n);
  const double grand_mean = grand_sum / static_cast<double>(grid.n);
  if (!(grand_mean > 0)) {
    throw std::runtime_error("grand mean strain must be positive, got " +
                             std::to_string(grand_mean));
  }
  if (report != nullptr) {
    report->stress_grid = grid;
  }
  return mean_std / grand_mean;
}

}  // namespace

double StressGrid::value(int i) const {
  return lo_bar + (hi_bar - lo_bar) * static_cast<double>(i + 1) /
                      static_cast<double>(n);
}

std::vector<double> StressGrid::values() const {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = value(i);
  }
  return v;
}

StressGrid common_stress_axis(const std::vector<StressStrainCurve>& curves,
                              const QualityConfig& cfg) {
  if (curves.size() < 2) {
    throw std::invalid_argument("common_stress_axis: need at least 2 curves, got " +
                                std::to_string(curves.size()));
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const StressStrainCurve& c : curves) {
    const Envelope env = make_envelope(c);
    lo = std::max(lo, env.min_stress());
    hi = std::min(hi, env.max_stress());
  }
  if (!(hi > lo)) {
    throw std::runtime_error("empty overlap: stress ranges do not intersect (max of minima " +
                             std::to_string(lo) + " bar >= min of maxima " +
                             std::to_string(hi) + " bar)");
  }
  StressGrid grid;
  grid.lo_bar = lo;
  grid.hi_bar = hi;
  grid.n = cfg.grid_points;
  return grid;
}

ConsistencyReport intra_sample_cv(const std::vector<StressStrainCurve>& curves,
                                  const QualityConfig& cfg) {
  ConsistencyReport report;
  report.sample_id = curves.empty() ? "" : curves.front().sample_id;
  report.n_curves = static_cast<int>(curves.size());
  report.cv =
      cv_with_normalization(curves, cfg, StdNormalization::sample, &report);
  return report;
}

double intra_sample_cv_value(const std::vector<StressStrainCurve>& curves,
                             const QualityConfig& cfg, StdNormalization norm) {
  return cv_with_normalization(curves, cfg, norm, nullptr);
}

QualityReport assess_quality(const std::vector<SegmentationOutcome>& outcomes,
                             const QualityConfig& cfg) {
  QualityReport report;
  int passed = 0;
  for (const SegmentationOutcome& o : outcomes) {
    CurveAssessment a;
    a.position_index = o.position_index;
    if (!o.result) {
      a.reasons.push_back("segmentation failed: " +
                          (o.error.empty() ? std::string("unknown error") : o.error));
    } else {
      const SegmentationResult& seg = *o.result;
      if (report.sample_id.empty()) {
        report.sample_id = seg.sample_id;
      }
      for (RegionLabel label : {RegionLabel::elastic, RegionLabel::densification}) {
        const RegionFit* r = seg.region(label);
        if (r != nullptr && r->line.r_squared < cfg.min_r2) {
          a.reasons.push_back(to_string(label) + " r_squared " +
                              std::to_string(r->line.r_squared) + " below " +
                              std::to_string(cfg.min_r2));
        }
      }
      if (seg.flags.count(CurveFlag::slope_order_violation) > 0) {
        a.reasons.push_back("region slope ordering violated");
      }
      try {
        pore_fraction(seg);  // value above 1 is reported, not failed
      } catch (const std::exception& e) {
        a.reasons.push_back(e.what());
      }
    }
    a.passed = a.reasons.empty();
    passed += a.passed ? 1 : 0;
    report.curves.push_back(std::move(a));
  }
  report.pass_fraction =
      outcomes.empty() ? 0.0
                       : static_cast<double>(passed) /
                             static_cast<double>(outcomes.size());
  report.sample_passed = report.pass_fraction >= cfg.min_pass_fraction;
  return report;
}

QualityReport assess_quality(const std::vector<SegmentationResult>& segs,
                             const QualityConfig& cfg) {
  std::vector<SegmentationOutcome> outcomes;
  outcomes.reserve(segs.size());
  for (const SegmentationResult& s : segs) {
    SegmentationOutcome o;
    o.position_index = s.position_index;
    o.result = s;
    outcomes.push_back(std::move(o));
  }
  return assess_quality(outcomes, cfg);
}

}  // namespace membrane
