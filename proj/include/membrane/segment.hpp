#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "membrane/config.hpp"
#include "membrane/fit.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// Smoothed view of a stress-strain curve on a uniform strain grid, with
/// derivatives, plus the strain-sorted source points the grid was built from.
struct DerivativeProfile {
  std::vector<double> strain;  ///< uniform grid, ascending
  std::vector<double> stress;  ///< smoothed stress on the grid [bar]
  std::vector<double> d1;      ///< d(stress)/d(strain) [bar]
  std::vector<double> d2;      ///< d2(stress)/d(strain)2 [bar]
  std::vector<double> src_strain;  ///< raw points sorted by strain
  std::vector<double> src_stress;
};

/// Local cubic regression with tricube weights. Bandwidth defaults to 5% of
/// the strain span and widens where fewer than eight points fall inside it.
DerivativeProfile smooth_and_differentiate(const StressStrainCurve& curve,
                                           const SmoothConfig& cfg = {});

/// Raised when a curve has no resolvable region structure (e.g. a straight
/// line). Callers in the batch pipeline record it and move on.
class SegmentationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Locate n_break region boundaries (n_break in {2, 3}): candidates seeded at
/// the largest isolated curvature peaks, refined by minimizing the squared
/// residual of a continuous piecewise-linear fit to the source points.
/// Returns strains sorted ascending. Throws SegmentationError when the
/// piecewise fit does not meaningfully improve on a single line.
std::vector<double> find_breakpoints(const DerivativeProfile& profile, int n_break,
                                     const SegmentConfig& cfg = {});

enum class RegionLabel { elastic, plateau, densification, creep };

std::string to_string(RegionLabel label);
RegionLabel region_label_from_string(const std::string& s);

/// One fitted region. strain_begin/strain_end bound the region in strain for
/// every label; for creep the line is strain versus time at near-constant
/// stress, for the others it is stress versus strain.
struct RegionFit {
  RegionLabel label = RegionLabel::elastic;
  double strain_begin = 0.0;
  double strain_end = 0.0;
  LineFit line;
};

struct SegmentationResult {
  std::string sample_id;
  int position_index = 1;
  std::vector<double> breakpoints;  ///< strictly increasing strains
  std::vector<RegionFit> regions;   ///< in strain order, contiguous
  bool has_creep = false;
  double creep_start_time = 0.0;  ///< time_s of the hold onset, 0 if none
  FlagSet flags;

  const RegionFit* region(RegionLabel label) const;
};

/// Index of the first point of a trailing constant-stress hold, if the curve
/// ends in one: stress spread under cfg.creep_stress_frac of max stress while
/// time advances more than cfg.creep_time_frac of the test duration.
std::optional<std::size_t> detect_creep_start(const StressStrainCurve& curve,
                                              const SegmentConfig& cfg = {});

/// Full segmentation: creep detection, breakpoint search on the loading part,
/// least-squares region fits, ordering and fit-quality flags.
SegmentationResult segment_curve(const StressStrainCurve& curve,
                                 const SegmentConfig& cfg = {});

/// Line-record serialization (one JSON object per curve).
nlohmann::json to_json(const SegmentationResult& result);
SegmentationResult segmentation_from_json(const nlohmann::json& j);

}  // namespace membrane
