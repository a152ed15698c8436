#include "membrane/config.hpp"

#include <cstdlib>
#include <stdexcept>

#include "membrane/keyvalue.hpp"

namespace membrane {
namespace {

double parse_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0') {
    throw std::runtime_error("config key " + key + ": not a number: '" + value + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw std::runtime_error("config key " + key + ": not an integer: '" + value + "'");
  }
  return i;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no") {
    return false;
  }
  throw std::runtime_error("config key " + key + ": not a boolean: '" + value + "'");
}

}  // namespace

void Config::apply(const std::string& key, const std::string& value) {
  if (key == "ingest.thickness_min_um") {
    ingest.thickness_min_um = parse_double(key, value);
  } else if (key == "ingest.thickness_max_um") {
    ingest.thickness_max_um = parse_double(key, value);
  } else if (key == "align.contact_threshold_frac") {
    align.contact_threshold_frac = parse_double(key, value);
  } else if (key == "align.contact_run_length") {
    align.contact_run_length = parse_int(key, value);
  } else if (key == "align.toe_stress_frac") {
    align.toe_stress_frac = parse_double(key, value);
  } else if (key == "align.toe_min_points") {
    align.toe_min_points = parse_int(key, value);
  } else if (key == "align.noise_floor_bar") {
    align.noise_floor_bar = parse_double(key, value);
  } else if (key == "align.min_points_after") {
    align.min_points_after = parse_int(key, value);
  } else if (key == "smooth.grid_points") {
    segment.smooth.grid_points = parse_int(key, value);
  } else if (key == "smooth.bandwidth_frac") {
    segment.smooth.bandwidth_frac = parse_double(key, value);
  } else if (key == "segment.min_r2") {
    segment.min_r2 = parse_double(key, value);
    quality.min_r2 = segment.min_r2;
  } else if (key == "segment.min_region_points") {
    segment.min_region_points = parse_int(key, value);
  } else if (key == "segment.boundary_trim_frac") {
    segment.boundary_trim_frac = parse_double(key, value);
  } else if (key == "segment.peak_min_separation_frac") {
    segment.peak_min_separation_frac = parse_double(key, value);
  } else if (key == "segment.peak_floor_frac") {
    segment.peak_floor_frac = parse_double(key, value);
  } else if (key == "segment.min_line_improvement") {
    segment.min_line_improvement = parse_double(key, value);
  } else if (key == "segment.creep_stress_frac") {
    segment.creep_stress_frac = parse_double(key, value);
  } else if (key == "segment.creep_time_frac") {
    segment.creep_time_frac = parse_double(key, value);
  } else if (key == "segment.plateau_min_frac") {
    segment.plateau_min_frac = parse_double(key, value);
  } else if (key == "quality.grid_points") {
    quality.grid_points = parse_int(key, value);
  } else if (key == "quality.min_pass_fraction") {
    quality.min_pass_fraction = parse_double(key, value);
  } else if (key == "quality.min_r2") {
    quality.min_r2 = parse_double(key, value);
  } else if (key == "formulate.viscosity_log10_alpha") {
    formulate.viscosity_log10_alpha = parse_double(key, value);
  } else if (key == "formulate.viscosity_log10_beta") {
    formulate.viscosity_log10_beta = parse_double(key, value);
  } else if (key == "formulate.viscosity_warn_ratio") {
    formulate.viscosity_warn_ratio = parse_double(key, value);
  } else if (key == "formulate.default_density_g_ml") {
    formulate.default_density_g_ml = parse_double(key, value);
  } else if (key == "psd.bin_width_nm") {
    psd.bin_width_nm = parse_double(key, value);
  } else if (key == "psd.include_border_pores") {
    psd.include_border_pores = parse_bool(key, value);
  } else if (key == "psd.dilation_nm") {
    psd.dilation_nm = parse_double(key, value);
  } else if (key == "campaign.rh_threshold_pct") {
    campaign.rh_threshold_pct = parse_double(key, value);
  } else if (key == "campaign.jobs") {
    campaign.jobs = parse_int(key, value);
  } else {
    throw std::runtime_error("unknown config key: " + key);
  }
}

Config load_config_file(const std::string& path) {
  Config cfg;
  for (const auto& [key, value] : parse_key_value_file(path)) {
    cfg.apply(key, value);
  }
  return cfg;
}

void apply_overrides(Config& cfg, const std::map<std::string, std::string>& overrides) {
  for (const auto& [key, value] : overrides) {
    cfg.apply(key, value);
  }
}

}  // namespace membrane
