#pragma once

#include <filesystem>
#include <string>

#include "membrane/psd.hpp"

namespace membrane {

/// Scale and replicate grouping for one mask image, from its `.meta` sidecar.
struct MaskMeta {
  double scale_nm_per_px = 0;
  std::string replicate_id;  ///< defaults to the image basename
  std::string sample_id;     ///< optional grouping key
};

MaskMeta parse_mask_meta_file(const std::filesystem::path& path);
void write_mask_meta_file(const MaskMeta& meta, const std::filesystem::path& path);

/// Reads an 8-bit grayscale PGM (P2 or P5) or PNG; values above 127 are pore.
/// Color PNGs are converted to grayscale first. scale/replicate fields are
/// left at defaults; callers apply the sidecar metadata.
PoreMask read_mask(const std::filesystem::path& path);

/// Reads the image plus its `.meta` sidecar (same basename).
PoreMask read_mask_with_meta(const std::filesystem::path& path);

/// Writes a binary PGM (P5): pore = 255, background = 0.
void write_mask_pgm(const PoreMask& mask, const std::filesystem::path& path);

}  // namespace membrane
