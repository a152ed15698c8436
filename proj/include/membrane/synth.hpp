#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "membrane/ingest.hpp"
#include "membrane/psd.hpp"
#include "membrane/types.hpp"

namespace membrane {

struct CreepSpec {
  double hold_stress_bar = 0;  ///< must lie past the densification onset
  double duration_s = 0;
  double creep_strain = 0;  ///< strain accumulated over the hold
};

/// Parameters of a trilinear ground-truth curve. The plateau/densification
/// fits of the generated curve intersect exactly at
/// densification_onset_strain, which is therefore the analytic pore fraction.
struct CurveSpec {
  std::string sample_id = "synthetic";
  int position_index = 1;
  double elastic_modulus_bar = 166.1;
  double yield_strain = 0.15;
  double plateau_slope_bar = 20.0;
  double densification_onset_strain = 0.57;
  double densification_slope_bar = 350.0;
  std::optional<CreepSpec> creep;
  double noise_sigma_bar = 0.0;  ///< Gaussian, applied to force
  std::uint64_t seed = 0;
  int n_points = 1000;  ///< loading samples (pad and hold add more)
  double thickness_um = 100.0;
  double pin_diameter_mm = 5.0;
  double polymer_wt_pct = 12.0;
  std::optional<double> humidity_pct;
  bool nitrogen_treated = false;
  double max_strain = 0.0;  ///< 0 means densification onset + 0.3
  double loading_duration_s = 60.0;
  int pad_points = 0;            ///< pre-contact samples before the ramp
  double pad_depth_strain = 0.0; ///< strain extent of the pre-contact travel

  void validate() const;
  double effective_max_strain() const;
};

struct GroundTruth {
  double elastic_modulus_bar = 0;
  double yield_strain = 0;
  double yield_stress_bar = 0;
  double plateau_slope_bar = 0;
  double densification_onset_strain = 0;
  double densification_slope_bar = 0;
  double pore_fraction = 0;  ///< analytic plateau/densification intersection
  double contact_strain = 0; ///< pre-contact travel, 0 without padding
  std::optional<double> creep_strain;
  std::optional<double> creep_onset_strain;
};

struct SyntheticCurve {
  RawCurve raw;
  SampleMeta meta;
  GroundTruth truth;
};

/// Noise-free trilinear stress at a given strain past contact.
double trilinear_stress(const CurveSpec& spec, double strain);

/// Deterministic function of (spec, seed): trilinear loading ramp, optional
/// pre-contact pad and constant-stress hold, instrument-side force noise.
SyntheticCurve generate_curve(const CurveSpec& spec);

void write_truth_file(const GroundTruth& truth, const std::filesystem::path& path);
GroundTruth parse_truth_file(const std::filesystem::path& path);

struct Disk {
  double cx_nm = 0;
  double cy_nm = 0;
  double d_nm = 0;
};

/// Rasterize non-overlapping disks into a pore mask by pixel-center sampling.
/// Throws when a disk leaves the image or two disks overlap.
PoreMask generate_disk_mask(const std::vector<Disk>& disks, double width_nm,
                            double height_nm, double scale_nm_per_px);

/// Seeded rejection sampling of non-overlapping disks with diameters uniform
/// in [d_min_nm, d_max_nm], kept margin_nm clear of the border.
std::vector<Disk> random_disk_layout(std::uint64_t seed, int n_disks,
                                     double d_min_nm, double d_max_nm,
                                     double width_nm, double height_nm,
                                     double margin_nm = 0.0);

/// Standard normal deviates from a seeded mt19937_64 via Box-Muller. The
/// engine is bit-specified by the standard and the transform is spelled out
/// here, so sequences are stable across standard libraries (which
/// normal_distribution does not guarantee).
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : rng_(seed) {}
  double next();

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  double spare_ = 0;
};

struct CampaignSynthOptions {
  std::uint64_t seed = 1;
  std::vector<double> wt_pct = {10, 12, 15, 17};
  int positions = 3;
  double noise_sigma_frac = 0.005;  ///< of each curve's max stress
  bool with_creep = false;          ///< one creep sample per group
};

/// Synthesizes a full campaign directory: per-position CSV + meta + ground
/// truth files for three humidity groups whose moduli rise and pore fractions
/// fall with concentration, plus a manifest. Returns the manifest path.
std::filesystem::path generate_demo_campaign(const std::filesystem::path& out_dir,
                                             const CampaignSynthOptions& opts);

}  // namespace membrane
