#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "membrane/config.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// Parses delimiter-separated (comma or tab, autodetected) instrument text.
/// The header row must name time_s, force_N and displacement_um in any order;
/// extra columns are ignored. Throws on a missing column or a non-numeric
/// cell, naming the offending row. Row-count validation is separate, see
/// RawCurve::validate().
RawCurve parse_force_displacement(std::istream& stream, const std::string& sample_id);
RawCurve parse_force_displacement_file(const std::filesystem::path& path,
                                       const std::string& sample_id);

/// Writes the same format parse_force_displacement reads. Values round-trip
/// bit-exactly.
void write_force_displacement(const RawCurve& curve, std::ostream& out);
void write_force_displacement_file(const RawCurve& curve,
                                   const std::filesystem::path& path);

/// Metadata sidecar (same basename, `.meta` extension).
struct SampleMeta {
  std::string sample_id;
  int position_index = 1;
  SampleGeometry geometry;
};

SampleMeta parse_meta(std::istream& in);
SampleMeta parse_meta_file(const std::filesystem::path& path);
void write_meta(const SampleMeta& meta, std::ostream& out);
void write_meta_file(const SampleMeta& meta, const std::filesystem::path& path);

/// stress [bar] = force [N] / pin area [mm^2] * 10, strain = displacement / thickness.
StressStrainCurve to_stress_strain(const RawCurve& raw, const SampleGeometry& geom);

/// Locates the contact point, removes the strain offset, truncates pre-contact
/// samples and clamps sub-noise-floor negative stresses. Idempotent.
StressStrainCurve align_contact(const StressStrainCurve& curve,
                                const AlignConfig& cfg = {});

}  // namespace membrane
