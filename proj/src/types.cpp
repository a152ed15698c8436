#include "membrane/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace membrane {

const char* to_string(CurveFlag flag) {
  switch (flag) {
    case CurveFlag::pore_fraction_gt_1: return "pore_fraction_gt_1";
    case CurveFlag::no_plateau: return "no_plateau";
    case CurveFlag::low_r2: return "low_r2";
    case CurveFlag::slope_order_violation: return "slope_order_violation";
    case CurveFlag::zero_creep: return "zero_creep";
    case CurveFlag::clamped_negative_stress: return "clamped_negative_stress";
    case CurveFlag::non_monotone_stress: return "non_monotone_stress";
  }
  return "unknown";
}

CurveFlag flag_from_string(const std::string& name) {
  for (CurveFlag f :
       {CurveFlag::pore_fraction_gt_1, CurveFlag::no_plateau, CurveFlag::low_r2,
        CurveFlag::slope_order_violation, CurveFlag::zero_creep,
        CurveFlag::clamped_negative_stress, CurveFlag::non_monotone_stress}) {
    if (name == to_string(f)) {
      return f;
    }
  }
  throw std::invalid_argument("unknown flag name: " + name);
}

std::string join_flags(const FlagSet& flags) {
  std::string out;
  for (CurveFlag f : flags) {
    if (!out.empty()) {
      out += ';';
    }
    out += to_string(f);
  }
  return out;
}

void RawCurve::validate() const {
  if (samples.size() < 16) {
    throw std::runtime_error("too few samples: " + std::to_string(samples.size()) +
                             " < 16 (" + sample_id + ")");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const RawSample& s = samples[i];
    if (!std::isfinite(s.force_n) || !std::isfinite(s.displacement_um) ||
        !std::isfinite(s.time_s)) {
      throw std::runtime_error("non-finite value at row " + std::to_string(i) +
                               " (" + sample_id + ")");
    }
    if (i > 0 && !(s.time_s > samples[i - 1].time_s)) {
      throw std::runtime_error("time not strictly increasing at row " +
                               std::to_string(i) + " (" + sample_id + ")");
    }
  }
}

double SampleGeometry::pin_area_mm2() const {
  const double r = pin_diameter_mm / 2.0;
  return kPi * r * r;
}

void SampleGeometry::validate(const IngestConfig& cfg) const {
  if (!(pin_diameter_mm > 0)) {
    throw std::runtime_error("pin_diameter_mm must be positive");
  }
  if (!(thickness_um > 0)) {
    throw std::runtime_error("thickness_um must be positive");
  }
  if (thickness_um < cfg.thickness_min_um || thickness_um > cfg.thickness_max_um) {
    throw std::runtime_error("thickness_um " + std::to_string(thickness_um) +
                             " outside plausibility band [" +
                             std::to_string(cfg.thickness_min_um) + ", " +
                             std::to_string(cfg.thickness_max_um) + "]");
  }
  if (!(polymer_wt_pct > 0 && polymer_wt_pct < 100)) {
    throw std::runtime_error("polymer_wt_pct must be in (0, 100)");
  }
}

double StressStrainCurve::max_stress() const {
  double m = 0;
  for (const CurvePoint& p : points) {
    m = std::max(m, p.stress_bar);
  }
  return m;
}

double StressStrainCurve::strain_min() const {
  double m = points.empty() ? 0 : points.front().strain;
  for (const CurvePoint& p : points) {
    m = std::min(m, p.strain);
  }
  return m;
}

double StressStrainCurve::strain_max() const {
  double m = points.empty() ? 0 : points.front().strain;
  for (const CurvePoint& p : points) {
    m = std::max(m, p.strain);
  }
  return m;
}

}  // namespace membrane
