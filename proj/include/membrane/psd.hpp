#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "membrane/config.hpp"

namespace membrane {

/// Binary pore raster from a segmented SEM image, row-major, 1 = pore.
struct PoreMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;
  double scale_nm_per_px = 1.0;
  std::string replicate_id;
  bool corrected = false;  ///< coating correction (dilation) applied

  std::uint8_t at(int x, int y) const {
    return bits[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)];
  }
  /// Throws on inconsistent dimensions, non-positive scale, or a mask with no
  /// background pixels.
  void validate() const;
};

struct PoreRecord {
  int id = 0;               ///< 1-based, in raster scan order
  std::int64_t area_px = 0;
  bool touches_border = false;
};

/// Connected components of the pore set under 8-connectivity.
std::vector<PoreRecord> label_pores(const PoreMask& mask);

/// Diameter of the circle with the given area: d = 2*sqrt(area/pi).
double equivalent_diameter(double area_nm2);

/// Squared Euclidean distance of every pixel to the nearest pore pixel
/// (in px^2); background-only masks get a large sentinel everywhere.
std::vector<double> squared_distance_to_pores(const PoreMask& mask);

/// Grow the pore set to all pixels within Euclidean distance t/scale of the
/// original pores (exact distance transform, supports sub-pixel t). Models
/// the removal of a conformal coating of thickness t from the pore walls.
PoreMask dilate_mask(const PoreMask& mask, double t_nm);

/// Area-weighted histogram of circular-equivalent pore diameters. Bin k
/// covers [k*w, (k+1)*w) nm, left-closed; each pore contributes its area as a
/// fraction of total image area to the bin holding its diameter. A positive
/// cfg.dilation_nm applies the coating correction before measuring.
struct PoreSizeDistribution {
  double bin_width_nm = 0.5;
  std::vector<double> area_fraction;  ///< indexed by bin, may be empty
  double surface_porosity_pct = 0;    ///< pixel-true, counted pores only
  bool corrected = false;
  int pore_count = 0;
  int border_pore_count = 0;
  std::string replicate_id;

  double bin_left_nm(std::size_t k) const {
    return bin_width_nm * static_cast<double>(k);
  }
};

PoreSizeDistribution area_weighted_psd(const PoreMask& mask,
                                       const PsdConfig& cfg = {});

struct AggregatedPsd {
  double bin_width_nm = 0.5;
  std::vector<double> mean_area_fraction;
  std::vector<double> se_area_fraction;
  double porosity_mean_pct = 0;
  double porosity_se_pct = 0;
  int n = 0;
};

/// Per-bin mean and standard error (sample std / sqrt(n)) over >= 2 replicate
/// distributions. Histograms of different length are zero-padded; a bin-width
/// mismatch is an error.
AggregatedPsd aggregate_replicates(const std::vector<PoreSizeDistribution>& psds);

}  // namespace membrane
