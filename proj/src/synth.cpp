#include "membrane/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "membrane/keyvalue.hpp"

namespace membrane {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double GaussianSource::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller on uniforms in (0, 1]; 53-bit mantissas from the raw engine.
  const double u1 =
      1.0 - static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;  // [0, 1)
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

void CurveSpec::validate() const {
  if (!(elastic_modulus_bar > plateau_slope_bar)) {
    throw std::invalid_argument("elastic modulus must exceed the plateau slope");
  }
  if (!(densification_slope_bar > plateau_slope_bar)) {
    throw std::invalid_argument("densification slope must exceed the plateau slope");
  }
  if (!(yield_strain > 0 && yield_strain < densification_onset_strain)) {
    throw std::invalid_argument(
        "yield strain must lie in (0, densification onset)");
  }
  if (n_points < 64) {
    throw std::invalid_argument("n_points must be at least 64");
  }
  if (!(thickness_um > 0) || !(pin_diameter_mm > 0)) {
    throw std::invalid_argument("geometry must be positive");
  }
  if (noise_sigma_bar < 0) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
  if (max_strain != 0 && !(max_strain > densification_onset_strain)) {
    throw std::invalid_argument("max strain must exceed the densification onset");
  }
  if ((pad_points > 0) != (pad_depth_strain > 0)) {
    throw std::invalid_argument(
        "pad_points and pad_depth_strain must be set together");
  }
  if (!(loading_duration_s > 0)) {
    throw std::invalid_argument("loading duration must be positive");
  }
  if (creep) {
    const double onset_stress = elastic_modulus_bar * yield_strain +
                                plateau_slope_bar *
                                    (densification_onset_strain - yield_strain);
    if (!(creep->hold_stress_bar > 1.05 * onset_stress)) {
      throw std::invalid_argument(
          "creep hold stress must lie well past the densification onset");
    }
    if (!(creep->duration_s > 0) || creep->creep_strain < 0) {
      throw std::invalid_argument("creep hold parameters out of range");
    }
  }
}

double CurveSpec::effective_max_strain() const {
  return max_strain > 0 ? max_strain : densification_onset_strain + 0.3;
}

double trilinear_stress(const CurveSpec& spec, double strain) {
  if (strain <= 0) {
    return 0.0;
  }
  const double yield_stress = spec.elastic_modulus_bar * spec.yield_strain;
  if (strain <= spec.yield_strain) {
    return spec.elastic_modulus_bar * strain;
  }
  if (strain <= spec.densification_onset_strain) {
    return yield_stress + spec.plateau_slope_bar * (strain - spec.yield_strain);
  }
  const double onset_stress =
      yield_stress +
      spec.plateau_slope_bar * (spec.densification_onset_strain - spec.yield_strain);
  return onset_stress +
         spec.densification_slope_bar * (strain - spec.densification_onset_strain);
}

SyntheticCurve generate_curve(const CurveSpec& spec) {
  spec.validate();
  SampleGeometry geom;
  geom.pin_diameter_mm = spec.pin_diameter_mm;
  geom.thickness_um = spec.thickness_um;
  geom.polymer_wt_pct = spec.polymer_wt_pct;
  geom.humidity_pct = spec.humidity_pct;
  geom.nitrogen_treated = spec.nitrogen_treated;
  const double area = geom.pin_area_mm2();
  const double newton_per_bar = area / 10.0;

  // Loading ends where the hold stress is reached, or at the strain limit.
  double load_end = spec.effective_max_strain();
  if (spec.creep) {
    const double onset_stress =
        trilinear_stress(spec, spec.densification_onset_strain);
    load_end = spec.densification_onset_strain +
               (spec.creep->hold_stress_bar - onset_stress) /
                   spec.densification_slope_bar;
  }
  const double max_stress = trilinear_stress(spec, load_end);
  const double contact_force_threshold = 0.005 * max_stress * newton_per_bar;

  GaussianSource noise(spec.seed);
  RawCurve raw;
  raw.sample_id = spec.sample_id;
  raw.position_index = spec.position_index;

  const int n_pad = spec.pad_points;
  const int n_load = spec.n_points;
  const int n_hold =
      spec.creep ? std::max(64, spec.n_points / 3) : 0;
  raw.samples.reserve(static_cast<std::size_t>(n_pad + n_load + n_hold));

  // Constant crosshead speed over pad + loading travel.
  const double dt = spec.loading_duration_s /
                    static_cast<double>(n_pad + n_load);
  int idx = 0;
  for (int i = 0; i < n_pad; ++i, ++idx) {
    const double strain_total = spec.pad_depth_strain * static_cast<double>(i) /
                                static_cast<double>(n_pad);
    RawSample s;
    s.time_s = dt * static_cast<double>(idx + 1);
    // Pre-contact: load cell reads noise only; keep it under the contact
    // threshold so the pad is unambiguous by construction.
    double f = spec.noise_sigma_bar * newton_per_bar * noise.next();
    const double cap = 0.4 * contact_force_threshold;
    f = std::clamp(f, -cap, cap);
    s.force_n = f;
    s.displacement_um = strain_total * spec.thickness_um;
    raw.samples.push_back(s);
  }
  for (int i = 0; i < n_load; ++i, ++idx) {
    const double strain =
        load_end * static_cast<double>(i) / static_cast<double>(n_load - 1);
    RawSample s;
    s.time_s = dt * static_cast<double>(idx + 1);
    s.force_n = trilinear_stress(spec, strain) * newton_per_bar +
                spec.noise_sigma_bar * newton_per_bar * noise.next();
    s.displacement_um = (spec.pad_depth_strain + strain) * spec.thickness_um;
    raw.samples.push_back(s);
  }
  if (spec.creep) {
    const double t0 = dt * static_cast<double>(idx);
    for (int i = 0; i < n_hold; ++i, ++idx) {
      const double frac =
          static_cast<double>(i + 1) / static_cast<double>(n_hold);
      RawSample s;
      s.time_s = t0 + spec.creep->duration_s * frac;
      s.force_n = spec.creep->hold_stress_bar * newton_per_bar +
                  spec.noise_sigma_bar * newton_per_bar * noise.next();
      s.displacement_um = (spec.pad_depth_strain + load_end +
                           spec.creep->creep_strain * frac) *
                          spec.thickness_um;
      raw.samples.push_back(s);
    }
  }

  SyntheticCurve out;
  out.raw = std::move(raw);
  out.meta.sample_id = spec.sample_id;
  out.meta.position_index = spec.position_index;
  out.meta.geometry = geom;
  out.truth.elastic_modulus_bar = spec.elastic_modulus_bar;
  out.truth.yield_strain = spec.yield_strain;
  out.truth.yield_stress_bar = spec.elastic_modulus_bar * spec.yield_strain;
  out.truth.plateau_slope_bar = spec.plateau_slope_bar;
  out.truth.densification_onset_strain = spec.densification_onset_strain;
  out.truth.densification_slope_bar = spec.densification_slope_bar;
  // The plateau and densification lines cross exactly at the onset.
  out.truth.pore_fraction = spec.densification_onset_strain;
  out.truth.contact_strain = spec.pad_depth_strain;
  if (spec.creep) {
    out.truth.creep_strain = spec.creep->creep_strain;
    out.truth.creep_onset_strain = load_end;
  }
  return out;
}

void write_truth_file(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << "elastic_modulus_bar = " << fmt(truth.elastic_modulus_bar) << '\n'
      << "yield_strain = " << fmt(truth.yield_strain) << '\n'
      << "yield_stress_bar = " << fmt(truth.yield_stress_bar) << '\n'
      << "plateau_slope_bar = " << fmt(truth.plateau_slope_bar) << '\n'
      << "densification_onset_strain = " << fmt(truth.densification_onset_strain)
      << '\n'
      << "densification_slope_bar = " << fmt(truth.densification_slope_bar) << '\n'
      << "pore_fraction = " << fmt(truth.pore_fraction) << '\n'
      << "contact_strain = " << fmt(truth.contact_strain) << '\n';
  if (truth.creep_strain) {
    out << "creep_strain = " << fmt(*truth.creep_strain) << '\n';
  }
  if (truth.creep_onset_strain) {
    out << "creep_onset_strain = " << fmt(*truth.creep_onset_strain) << '\n';
  }
}

GroundTruth parse_truth_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  GroundTruth t;
  for (const auto& [key, value] : parse_key_values(in)) {
    const double v = std::stod(value);
    if (key == "elastic_modulus_bar") {
      t.elastic_modulus_bar = v;
    } else if (key == "yield_strain") {
      t.yield_strain = v;
    } else if (key == "yield_stress_bar") {
      t.yield_stress_bar = v;
    } else if (key == "plateau_slope_bar") {
      t.plateau_slope_bar = v;
    } else if (key == "densification_onset_strain") {
      t.densification_onset_strain = v;
    } else if (key == "densification_slope_bar") {
      t.densification_slope_bar = v;
    } else if (key == "pore_fraction") {
      t.pore_fraction = v;
    } else if (key == "contact_strain") {
      t.contact_strain = v;
    } else if (key == "creep_strain") {
      t.creep_strain = v;
    } else if (key == "creep_onset_strain") {
      t.creep_onset_strain = v;
    } else {
      throw std::runtime_error(path.string() + ": unknown truth key: " + key);
    }
  }
  return t;
}

PoreMask generate_disk_mask(const std::vector<Disk>& disks, double width_nm,
                            double height_nm, double scale_nm_per_px) {
  if (!(width_nm > 0 && height_nm > 0 && scale_nm_per_px > 0)) {
    throw std::invalid_argument("mask geometry must be positive");
  }
  for (std::size_t i = 0; i < disks.size(); ++i) {
    const Disk& d = disks[i];
    const double r = d.d_nm / 2.0;
    if (!(d.d_nm > 0)) {
      throw std::invalid_argument("disk " + std::to_string(i) +
                                  " has non-positive diameter");
    }
    if (d.cx_nm - r < 0 || d.cy_nm - r < 0 || d.cx_nm + r > width_nm ||
        d.cy_nm + r > height_nm) {
      throw std::invalid_argument("disk " + std::to_string(i) +
                                  " extends outside the image");
    }
    for (std::size_t j = i + 1; j < disks.size(); ++j) {
      const double dx = d.cx_nm - disks[j].cx_nm;
      const double dy = d.cy_nm - disks[j].cy_nm;
      const double min_dist = r + disks[j].d_nm / 2.0;
      if (dx * dx + dy * dy < min_dist * min_dist) {
        throw std::invalid_argument("disks " + std::to_string(i) + " and " +
                                    std::to_string(j) + " overlap");
      }
    }
  }

  PoreMask mask;
  mask.width = static_cast<int>(std::lround(width_nm / scale_nm_per_px));
  mask.height = static_cast<int>(std::lround(height_nm / scale_nm_per_px));
  mask.scale_nm_per_px = scale_nm_per_px;
  if (mask.width <= 0 || mask.height <= 0) {
    throw std::invalid_argument("image smaller than one pixel");
  }
  mask.bits.assign(
      static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height),
      0);
  for (const Disk& d : disks) {
    const double r = d.d_nm / 2.0;
    const double r2 = r * r;
    const int x0 = std::max(0, static_cast<int>((d.cx_nm - r) / scale_nm_per_px) - 1);
    const int x1 = std::min(mask.width - 1,
                            static_cast<int>((d.cx_nm + r) / scale_nm_per_px) + 1);
    const int y0 = std::max(0, static_cast<int>((d.cy_nm - r) / scale_nm_per_px) - 1);
    const int y1 = std::min(mask.height - 1,
                            static_cast<int>((d.cy_nm + r) / scale_nm_per_px) + 1);
    for (int y = y0; y <= y1; ++y) {
      const double py = (static_cast<double>(y) + 0.5) * scale_nm_per_px;
      for (int x = x0; x <= x1; ++x) {
        const double px = (static_cast<double>(x) + 0.5) * scale_nm_per_px;
        const double dx = px - d.cx_nm;
        const double dy = py - d.cy_nm;
        if (dx * dx + dy * dy <= r2) {
          mask.bits[static_cast<std::size_t>(y) * mask.width + x] = 1;
        }
      }
    }
  }
  return mask;
}

std::vector<Disk> random_disk_layout(std::uint64_t seed, int n_disks,
                                     double d_min_nm, double d_max_nm,
                                     double width_nm, double height_nm,
                                     double margin_nm) {
  if (n_disks < 0 || !(d_min_nm > 0) || !(d_max_nm >= d_min_nm)) {
    throw std::invalid_argument("invalid disk layout request");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&rng](double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  };
  std::vector<Disk> disks;
  int tries = 0;
  const int max_tries = 10000 * std::max(1, n_disks);
  while (static_cast<int>(disks.size()) < n_disks) {
    if (++tries > max_tries) {
      throw std::runtime_error("random_disk_layout: could not place " +
                               std::to_string(n_disks) + " disks after " +
                               std::to_string(max_tries) + " tries");
    }
    Disk d;
    d.d_nm = uniform(d_min_nm, d_max_nm);
    const double r = d.d_nm / 2.0 + margin_nm;
    if (2 * r >= width_nm || 2 * r >= height_nm) {
      continue;
    }
    d.cx_nm = uniform(r, width_nm - r);
    d.cy_nm = uniform(r, height_nm - r);
    bool clear = true;
    for (const Disk& other : disks) {
      const double dx = d.cx_nm - other.cx_nm;
      const double dy = d.cy_nm - other.cy_nm;
      const double min_dist = (d.d_nm + other.d_nm) / 2.0 + margin_nm;
      if (dx * dx + dy * dy < min_dist * min_dist) {
        clear = false;
        break;
      }
    }
    if (clear) {
      disks.push_back(d);
    }
  }
  return disks;
}

std::filesystem::path generate_demo_campaign(const std::filesystem::path& out_dir,
                                             const CampaignSynthOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  struct Group {
    const char* tag;
    std::optional<double> humidity;
    bool nitrogen;
    double modulus_base;
  };
  const Group groups[3] = {
      {"humid", 62.0, false, 20.0},
      {"dry", 35.0, false, 45.0},
      {"nitro", 35.0, true, 70.0},
  };

  nlohmann::json samples = nlohmann::json::array();
  std::uint64_t counter = 0;
  for (const Group& g : groups) {
    for (double wt : opts.wt_pct) {
      const std::string id =
          std::string(g.tag) + "-w" + std::to_string(static_cast<int>(wt));
      for (int pos = 1; pos <= opts.positions; ++pos) {
        CurveSpec spec;
        spec.sample_id = id;
        spec.position_index = pos;
        // Stiffness rises and pore fraction falls with concentration; small
        // deterministic position-to-position perturbations mimic repeats.
        const double jitter =
            0.02 * static_cast<double>((pos % 3)) - 0.02;
        spec.elastic_modulus_bar = (g.modulus_base + 9.0 * wt) * (1.0 + jitter);
        spec.yield_strain = 0.12;
        spec.plateau_slope_bar = 18.0;
        spec.densification_onset_strain = (0.95 - 0.025 * wt) * (1.0 + jitter);
        spec.densification_slope_bar = 320.0;
        spec.polymer_wt_pct = wt;
        spec.humidity_pct = g.humidity;
        spec.nitrogen_treated = g.nitrogen;
        spec.n_points = 600;
        spec.seed = opts.seed * 1000003u + counter++;
        if (opts.with_creep && wt == opts.wt_pct.front() && pos == 1) {
          CreepSpec creep;
          creep.hold_stress_bar =
              1.6 * trilinear_stress(spec, spec.densification_onset_strain);
          creep.duration_s = 30.0;
          creep.creep_strain = 0.03;
          spec.creep = creep;
        }
        // Noise scales with the curve's own max stress.
        const double max_stress =
            spec.creep ? spec.creep->hold_stress_bar
                       : trilinear_stress(spec, spec.effective_max_strain());
        spec.noise_sigma_bar = opts.noise_sigma_frac * max_stress;
        const SyntheticCurve synth = generate_curve(spec);
        const std::string base = id + "-p" + std::to_string(pos);
        write_force_displacement_file(synth.raw, out_dir / (base + ".csv"));
        write_meta_file(synth.meta, out_dir / (base + ".meta"));
        write_truth_file(synth.truth, out_dir / (base + ".truth"));
        samples.push_back({{"data", base + ".csv"}, {"meta", base + ".meta"}});
      }
    }
  }

  nlohmann::json manifest = {{"version", 1},
                             {"root", "."},
                             {"output", "report"},
                             {"samples", samples}};
  const fs::path manifest_path = out_dir / "manifest.json";
  std::ofstream out(manifest_path);
  if (!out) {
    throw std::runtime_error("cannot write " + manifest_path.string());
  }
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

}  // namespace membrane
