#pragma once

#include <map>
#include <string>

#include "membrane/types.hpp"

namespace membrane {

struct AlignConfig {
  // Contact: first index whose stress exceeds contact_threshold_frac times the
  // curve maximum and stays above it for contact_run_length samples.
  double contact_threshold_frac = 0.005;
  int contact_run_length = 5;
  // Toe correction: line fit over the early post-contact window, extrapolated
  // back to zero stress.
  double toe_stress_frac = 0.05;
  int toe_min_points = 8;
  double noise_floor_bar = 0.2;
  int min_points_after = 16;
};

struct SmoothConfig {
  int grid_points = 512;
  double bandwidth_frac = 0.05;
};

struct SegmentConfig {
  SmoothConfig smooth;
  double min_r2 = 0.95;
  int min_region_points = 4;
  double boundary_trim_frac = 0.05;
  double peak_min_separation_frac = 0.05;
  double peak_floor_frac = 0.05;
  // A piecewise fit must cut the single-line residual by at least this
  // fraction, otherwise the curve has no usable region structure.
  double min_line_improvement = 0.5;
  double creep_stress_frac = 0.01;
  double creep_time_frac = 0.05;
  double plateau_min_frac = 0.05;
};

struct QualityConfig {
  int grid_points = 200;
  double min_pass_fraction = 0.75;
  double min_r2 = 0.95;
};

struct FormulateConfig {
  // log10(viscosity) = alpha + beta * wt_pct; only the ratio between two
  // components feeds the mixing warning.
  double viscosity_log10_alpha = -3.0;
  double viscosity_log10_beta = 0.15;
  double viscosity_warn_ratio = 50.0;
  double default_density_g_ml = 1.0;
};

struct PsdConfig {
  double bin_width_nm = 0.5;
  bool include_border_pores = true;
  double dilation_nm = 0.0;
};

struct CampaignConfig {
  double rh_threshold_pct = 49.0;
  int jobs = 0;  // 0 = logical cores
};

struct Config {
  IngestConfig ingest;
  AlignConfig align;
  SegmentConfig segment;
  QualityConfig quality;
  FormulateConfig formulate;
  PsdConfig psd;
  CampaignConfig campaign;

  /// Applies one dotted-key override, e.g. ("segment.min_r2", "0.9").
  /// Throws on unknown keys or unparsable values.
  void apply(const std::string& key, const std::string& value);
};

Config load_config_file(const std::string& path);
void apply_overrides(Config& cfg, const std::map<std::string, std::string>& overrides);

}  // namespace membrane
