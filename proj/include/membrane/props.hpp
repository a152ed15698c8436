#pragma once

#include <optional>

#include "membrane/segment.hpp"
#include "membrane/types.hpp"

namespace membrane {

struct MechanicalProperties {
  double elastic_modulus_bar = 0;
  double yield_strength_bar = 0;
  double pore_fraction = 0;
  std::optional<double> creep_strain;
  FlagSet flags;
};

/// Slope of the elastic-region fit. Throws when the region is missing or the
/// slope is non-positive.
double elastic_modulus(const SegmentationResult& seg);

/// Stress of the elastic fit evaluated at the elastic-plateau boundary.
double yield_strength(const SegmentationResult& seg);

/// Strain where the plateau and densification fits intersect. Values above 1
/// are returned as-is with pore_fraction_gt_1 added to *flags. Throws
/// "degenerate intersection" when the fits are parallel (slope difference
/// below 1e-9 bar).
double pore_fraction(const SegmentationResult& seg, FlagSet* flags = nullptr);

/// Strain accumulated across the creep region, absent when the curve had no
/// constant-stress hold. A zero-length hold yields 0 with a zero_creep flag.
std::optional<double> creep_strain(const SegmentationResult& seg,
                                   FlagSet* flags = nullptr);

/// All of the above plus the segmentation flags, as one record.
MechanicalProperties extract_properties(const SegmentationResult& seg);

}  // namespace membrane
