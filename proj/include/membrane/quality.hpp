#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "membrane/config.hpp"
#include "membrane/segment.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// Uniform stress grid over the overlap of several curves' stress ranges.
/// The grid starts one step above the overlap minimum (strain and stress are
/// both near zero there) and ends exactly at the overlap maximum.
struct StressGrid {
  double lo_bar = 0;  ///< open lower bound of the overlap
  double hi_bar = 0;
  int n = 0;

  double value(int i) const;
  std::vector<double> values() const;
};

StressGrid common_stress_axis(const std::vector<StressStrainCurve>& curves,
                              const QualityConfig& cfg = {});

struct ConsistencyReport {
  std::string sample_id;
  int n_curves = 0;
  double cv = 0;
  StressGrid stress_grid;
  std::map<int, FlagSet> per_curve_flags;  ///< keyed by position_index
};

/// Coefficient of variance across repeated tests of one sample: strain is
/// interpolated onto the common stress axis, the sample (n-1) standard
/// deviation of strain is averaged over the grid and normalized by the grand
/// mean strain.
ConsistencyReport intra_sample_cv(const std::vector<StressStrainCurve>& curves,
                                  const QualityConfig& cfg = {});

/// Variant used by property tests to compare normalization conventions.
enum class StdNormalization { sample, population };
double intra_sample_cv_value(const std::vector<StressStrainCurve>& curves,
                             const QualityConfig& cfg,
                             StdNormalization norm);

/// One curve's segmentation outcome as seen by the quality gate; failed
/// segmentations carry the error text instead of a result.
struct SegmentationOutcome {
  int position_index = 1;
  std::optional<SegmentationResult> result;
  std::string error;
};

struct CurveAssessment {
  int position_index = 1;
  bool passed = false;
  std::vector<std::string> reasons;  ///< empty when passed
};

struct QualityReport {
  std::string sample_id;
  std::vector<CurveAssessment> curves;
  double pass_fraction = 0;
  bool sample_passed = false;
};

/// Pass/fail per curve on segmentation success, fit r-squared, slope
/// ordering, and pore-fraction extraction; the sample passes when at least
/// cfg.min_pass_fraction of its curves pass (boundary inclusive).
QualityReport assess_quality(const std::vector<SegmentationOutcome>& outcomes,
                             const QualityConfig& cfg = {});
QualityReport assess_quality(const std::vector<SegmentationResult>& segs,
                             const QualityConfig& cfg = {});

}  // namespace membrane
