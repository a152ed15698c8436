#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace membrane {

inline constexpr double kPi = 3.14159265358979323846;

/// Quality flags attached to curves and extracted properties.
enum class CurveFlag {
  pore_fraction_gt_1,
  no_plateau,
  low_r2,
  slope_order_violation,
  zero_creep,
  clamped_negative_stress,
  non_monotone_stress,
};

using FlagSet = std::set<CurveFlag>;

const char* to_string(CurveFlag flag);
CurveFlag flag_from_string(const std::string& name);
std::string join_flags(const FlagSet& flags);

/// One instrument record: elapsed time, load-cell force, LVDT displacement.
struct RawSample {
  double time_s = 0;
  double force_n = 0;
  double displacement_um = 0;
};

struct RawCurve {
  std::string sample_id;
  int position_index = 1;
  std::vector<RawSample> samples;

  /// Throws std::runtime_error on too few samples, non-increasing time,
  /// or non-finite force/displacement values.
  void validate() const;
};

struct IngestConfig {
  double thickness_min_um = 20.0;
  double thickness_max_um = 500.0;
};

struct SampleGeometry {
  double pin_diameter_mm = 5.0;
  double thickness_um = 0;
  double polymer_wt_pct = 0;
  std::optional<double> humidity_pct;
  bool nitrogen_treated = false;

  double pin_area_mm2() const;
  void validate(const IngestConfig& cfg = {}) const;
};

struct CurvePoint {
  double strain = 0;
  double stress_bar = 0;
  double time_s = 0;
};

/// Engineering stress-strain series for one test position.
struct StressStrainCurve {
  std::string sample_id;
  int position_index = 1;
  std::vector<CurvePoint> points;
  SampleGeometry geometry;
  // Offsets subtracted by contact alignment; zero for unaligned curves.
  double strain_offset = 0;
  double stress_offset = 0;
  FlagSet flags;

  double max_stress() const;
  double strain_min() const;
  double strain_max() const;
};

}  // namespace membrane
