// membrane-mech: compression analysis toolkit for porous membranes.
//
// Subcommands cover the single-curve path (analyze), repeatability checks
// (cv), wet-lab planning (plan-dilution), SEM pore statistics (psd),
// synthetic data generation (synth), batch processing (campaign) and trend
// refits from existing property tables (trend).

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "membrane/campaign.hpp"
#include "membrane/config.hpp"
#include "membrane/formulate.hpp"
#include "membrane/ingest.hpp"
#include "membrane/mask_io.hpp"
#include "membrane/props.hpp"
#include "membrane/psd.hpp"
#include "membrane/segment.hpp"
#include "membrane/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string format = "csv";
};

membrane::Config load_config(const GlobalOpts& g) {
  if (!g.config_path.empty()) {
    return membrane::load_config_file(g.config_path);
  }
  if (const char* env = std::getenv("MEMBRANE_MECH_CONFIG"); env && *env) {
    return membrane::load_config_file(env);
  }
  return {};
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

/// Writes to --out/<name> when an output directory was given, else stdout.
void emit(const GlobalOpts& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out << text;
  std::cout << path.string() << "\n";
}

json properties_to_json(const membrane::MechanicalProperties& props) {
  json j;
  j["elastic_modulus_bar"] = props.elastic_modulus_bar;
  j["yield_strength_bar"] = props.yield_strength_bar;
  j["pore_fraction"] = props.pore_fraction;
  if (props.creep_strain) {
    j["creep_strain"] = *props.creep_strain;
  }
  j["flags"] = json::array();
  for (membrane::CurveFlag f : props.flags) {
    j["flags"].push_back(membrane::to_string(f));
  }
  return j;
}

int cmd_analyze(const GlobalOpts& g, const std::string& file) {
  const membrane::Config cfg = load_config(g);
  fs::path meta_path = file;
  meta_path.replace_extension(".meta");
  const membrane::SampleMeta meta = membrane::parse_meta_file(meta_path);
  meta.geometry.validate(cfg.ingest);
  membrane::RawCurve raw = membrane::parse_force_displacement_file(file, meta.sample_id);
  raw.position_index = meta.position_index;
  raw.validate();
  const membrane::StressStrainCurve aligned =
      membrane::align_contact(membrane::to_stress_strain(raw, meta.geometry), cfg.align);
  const membrane::SegmentationResult seg = membrane::segment_curve(aligned, cfg.segment);
  const membrane::MechanicalProperties props = membrane::extract_properties(seg);

  json out;
  out["segmentation"] = membrane::to_json(seg);
  out["properties"] = properties_to_json(props);
  const std::string name =
      meta.sample_id + "-p" + std::to_string(meta.position_index) + ".json";
  emit(g, name, out.dump(2) + "\n");
  return 0;
}

/// Builds an in-memory manifest from every *.csv with a .meta sidecar in dir.
membrane::CampaignManifest manifest_from_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir.string());
  }
  membrane::CampaignManifest m;
  m.root = dir;
  m.output = dir / "report";
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    fs::path meta = f;
    meta.replace_extension(".meta");
    if (!fs::exists(meta)) {
      continue;
    }
    m.samples.push_back({f, meta, f.filename().string()});
  }
  if (m.samples.empty()) {
    throw std::runtime_error("no curve files with .meta sidecars in " + dir.string());
  }
  return m;
}

int cmd_cv(const GlobalOpts& g, const std::string& dir) {
  const membrane::Config cfg = load_config(g);
  const membrane::CampaignManifest m = manifest_from_dir(dir);
  membrane::CampaignOptions opts;
  opts.jobs = g.jobs;
  opts.format = membrane::output_format_from_string(g.format);
  opts.write_plots = false;
  const membrane::CampaignResult result = membrane::run_campaign(m, cfg, opts);

  std::ostringstream out;
  if (opts.format == membrane::OutputFormat::csv) {
    out << "# schema: membrane-mech cv v1\n";
    out << "sample_id,n_curves,cv,passed,reasons\n";
  }
  for (const membrane::CvRow& r : result.cv_rows) {
    if (opts.format == membrane::OutputFormat::csv) {
      std::string reasons = r.reasons;
      if (reasons.find_first_of(",\"\n") != std::string::npos) {
        std::string quoted = "\"";
        for (char c : reasons) {
          if (c == '"') {
            quoted += '"';
          }
          quoted += c;
        }
        reasons = quoted + "\"";
      }
      out << r.sample_id << "," << r.n_curves << "," << (r.cv ? fmt(*r.cv) : "")
          << "," << (r.passed ? "true" : "false") << "," << reasons << "\n";
    } else {
      json j;
      j["sample_id"] = r.sample_id;
      j["n_curves"] = r.n_curves;
      if (r.cv) {
        j["cv"] = *r.cv;
      }
      j["passed"] = r.passed;
      j["reasons"] = r.reasons;
      out << j.dump() << "\n";
    }
  }
  const bool csv = opts.format == membrane::OutputFormat::csv;
  emit(g, csv ? "cv.csv" : "cv.jsonl", out.str());
  for (const membrane::ErrorRecord& e : result.errors) {
    std::cerr << e.source << " [" << e.stage << "]: " << e.message << "\n";
  }
  return result.clean() ? 0 : 3;
}

int cmd_plan(const GlobalOpts& g, double stock_pct, double diluent_pct,
             const std::vector<double>& targets, double mass,
             const std::string& stock_label, const std::string& diluent_label,
             double stock_density, double diluent_density) {
  const membrane::Config cfg = load_config(g);
  membrane::Stock a{stock_label, stock_pct,
                    stock_density > 0 ? stock_density : cfg.formulate.default_density_g_ml};
  membrane::Stock b{diluent_label, diluent_pct,
                    diluent_density > 0 ? diluent_density : cfg.formulate.default_density_g_ml};
  const membrane::SeriesPlan series =
      membrane::plan_series(a, b, targets, mass, cfg.formulate);

  std::ostringstream out;
  if (g.format == "csv") {
    out << "# schema: membrane-mech dilution v1\n";
    out << "target_wt_pct,component,mass_g,volume_ml,viscosity_ratio,warning\n";
    for (const membrane::DilutionPlan& p : series.plans) {
      for (const membrane::PlanComponent& c : p.components) {
        out << fmt(p.target_wt_pct) << "," << c.label << "," << fmt(c.mass_g) << ","
            << fmt(c.volume_ml) << "," << fmt(p.viscosity_ratio) << ","
            << (p.warning ? "\"" + *p.warning + "\"" : "") << "\n";
      }
    }
    for (const auto& [label, total] : series.total_mass_g) {
      out << "# total " << label << ": " << fmt(total) << " g\n";
    }
  } else {
    for (const membrane::DilutionPlan& p : series.plans) {
      json j;
      j["target_wt_pct"] = p.target_wt_pct;
      j["total_mass_g"] = p.total_mass_g;
      j["viscosity_ratio"] = p.viscosity_ratio;
      if (p.warning) {
        j["warning"] = *p.warning;
      }
      j["components"] = json::array();
      for (const membrane::PlanComponent& c : p.components) {
        j["components"].push_back({{"label", c.label},
                                   {"mass_g", c.mass_g},
                                   {"volume_ml", c.volume_ml}});
      }
      out << j.dump() << "\n";
    }
  }
  const bool csv = g.format == "csv";
  emit(g, csv ? "dilution.csv" : "dilution.jsonl", out.str());
  return 0;
}

int cmd_psd(const GlobalOpts& g, const std::string& dir) {
  const membrane::Config cfg = load_config(g);
  if (!fs::is_directory(dir)) {
    throw std::runtime_error("not a directory: " + dir);
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".png" || ext == ".pgm")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw std::runtime_error("no mask images (.png/.pgm) in " + dir);
  }

  std::vector<membrane::PoreSizeDistribution> psds;
  for (const fs::path& f : files) {
    psds.push_back(membrane::area_weighted_psd(membrane::read_mask_with_meta(f), cfg.psd));
  }

  std::ostringstream out;
  out << "# schema: membrane-mech psd v1\n";
  out << "# replicates: " << psds.size() << "\n";
  for (const membrane::PoreSizeDistribution& p : psds) {
    out << "# replicate " << p.replicate_id << ": porosity_pct "
        << fmt(p.surface_porosity_pct) << ", pores " << p.pore_count
        << " (border " << p.border_pore_count << ")"
        << (p.corrected ? ", coating-corrected" : "") << "\n";
  }
  if (psds.size() >= 2) {
    const membrane::AggregatedPsd agg = membrane::aggregate_replicates(psds);
    out << "# porosity_pct_mean: " << fmt(agg.porosity_mean_pct) << "\n";
    out << "# porosity_pct_se: " << fmt(agg.porosity_se_pct) << "\n";
    out << "bin_left_nm,area_fraction_mean,area_fraction_se\n";
    for (std::size_t b = 0; b < agg.mean_area_fraction.size(); ++b) {
      out << fmt(agg.bin_width_nm * static_cast<double>(b)) << ","
          << fmt(agg.mean_area_fraction[b]) << "," << fmt(agg.se_area_fraction[b])
          << "\n";
    }
  } else {
    const membrane::PoreSizeDistribution& p = psds.front();
    out << "# porosity_pct_mean: " << fmt(p.surface_porosity_pct) << "\n";
    out << "bin_left_nm,area_fraction_mean,area_fraction_se\n";
    for (std::size_t b = 0; b < p.area_fraction.size(); ++b) {
      out << fmt(p.bin_left_nm(b)) << "," << fmt(p.area_fraction[b]) << ",\n";
    }
  }
  emit(g, "psd.csv", out.str());
  return 0;
}

int cmd_synth(const GlobalOpts& g, int positions, double noise_frac,
              bool with_creep, const std::vector<double>& wt) {
  membrane::CampaignSynthOptions opts;
  opts.seed = g.seed;
  opts.positions = positions;
  opts.noise_sigma_frac = noise_frac;
  opts.with_creep = with_creep;
  if (!wt.empty()) {
    opts.wt_pct = wt;
  }
  const fs::path out_dir = g.out.empty() ? fs::path("synth-demo") : fs::path(g.out);
  const fs::path manifest = membrane::generate_demo_campaign(out_dir, opts);
  std::cout << manifest.string() << "\n";
  return 0;
}

int cmd_campaign(const GlobalOpts& g, const std::string& manifest_path) {
  const membrane::CampaignManifest manifest = membrane::CampaignManifest::load(manifest_path);
  membrane::Config cfg = load_config(g);
  for (const auto& [key, value] : manifest.config_overrides) {
    cfg.apply(key, value);
  }
  membrane::CampaignOptions opts;
  opts.jobs = g.jobs;
  opts.format = membrane::output_format_from_string(g.format);
  const membrane::CampaignResult result = membrane::run_campaign(manifest, cfg, opts);
  const fs::path out_dir = g.out.empty() ? manifest.output : fs::path(g.out);
  membrane::write_campaign_outputs(result, out_dir, opts);

  std::cout << "processed " << manifest.samples.size() << " entries: "
            << result.properties.size() << " property rows, " << result.cv_rows.size()
            << " samples, " << result.trends.size() << " trend fits, "
            << result.errors.size() << " errors -> " << out_dir.string() << "\n";
  for (const membrane::ErrorRecord& e : result.errors) {
    std::cerr << e.source << " [" << e.stage << "]: " << e.message << "\n";
  }
  return result.clean() ? 0 : 3;
}

/// Splits one CSV record, honoring double-quoted fields.
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

int cmd_trend(const GlobalOpts& g, const std::string& table_path) {
  std::ifstream in(table_path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + table_path);
  }

  // Accepts either the CSV or the json-lines flavor of properties output.
  std::map<std::string, std::vector<std::pair<double, double>>> modulus, pore;
  std::string line;
  std::vector<std::string> header;
  auto add = [&](const std::string& group, double wt, double mod, double pf) {
    modulus[group].emplace_back(wt, mod);
    pore[group].emplace_back(wt, pf);
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || line[0] == '#') {
      continue;
    }
    if (line[0] == '{') {
      const json j = json::parse(line);
      add(j.at("humidity_group").get<std::string>(), j.at("wt_pct").get<double>(),
          j.at("modulus_bar").get<double>(), j.at("pore_fraction").get<double>());
      continue;
    }
    std::vector<std::string> cells = split_csv(line);
    if (header.empty()) {
      header = std::move(cells);
      continue;
    }
    auto col = [&](const std::string& name) -> const std::string& {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end()) {
        throw std::runtime_error("property table is missing column " + name);
      }
      const std::size_t idx = static_cast<std::size_t>(it - header.begin());
      if (idx >= cells.size()) {
        throw std::runtime_error("short row in property table");
      }
      return cells[idx];
    };
    add(col("humidity_group"), std::stod(col("wt_pct")), std::stod(col("modulus_bar")),
        std::stod(col("pore_fraction")));
  }

  std::vector<membrane::TrendFit> trends;
  for (const auto& [group, pts] : modulus) {
    try {
      trends.push_back(membrane::fit_trend(pts, group, "elastic_modulus"));
    } catch (const std::invalid_argument& e) {
      std::cerr << e.what() << "\n";
    }
    try {
      trends.push_back(membrane::fit_trend(pore[group], group, "pore_fraction"));
    } catch (const std::invalid_argument& e) {
      std::cerr << e.what() << "\n";
    }
  }

  std::ostringstream out;
  const bool csv = g.format == "csv";
  if (csv) {
    out << "# schema: membrane-mech trends v1\n";
    out << "group,response,slope,intercept,n,r_squared\n";
  }
  for (const membrane::TrendFit& t : trends) {
    if (csv) {
      out << t.group << "," << t.response << "," << fmt(t.slope) << ","
          << fmt(t.intercept) << "," << t.n << "," << fmt(t.r_squared) << "\n";
    } else {
      json j;
      j["group"] = t.group;
      j["response"] = t.response;
      j["slope"] = t.slope;
      j["intercept"] = t.intercept;
      j["n"] = t.n;
      j["r_squared"] = t.r_squared;
      out << j.dump() << "\n";
    }
  }
  emit(g, csv ? "trends.csv" : "trends.jsonl", out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compression analysis toolkit for porous membranes"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--config", g.config_path,
                 "key = value config file (falls back to $MEMBRANE_MECH_CONFIG)");
  app.add_option("--out", g.out, "output directory (default: stdout / manifest output)");
  app.add_option("--seed", g.seed, "seed for synthetic data");
  app.add_option("--jobs", g.jobs, "worker threads, 0 = logical cores");
  app.add_option("--format", g.format, "table format")
      ->check(CLI::IsMember({"csv", "json-lines"}));

  auto* analyze = app.add_subcommand("analyze", "segment one curve and extract properties");
  analyze->fallthrough();
  std::string analyze_file;
  analyze->add_option("file", analyze_file, "force-displacement CSV with .meta sidecar")
      ->required();

  auto* cv = app.add_subcommand("cv", "repeatability report for every sample in a directory");
  cv->fallthrough();
  std::string cv_dir;
  cv->add_option("dir", cv_dir, "directory of curve CSVs with .meta sidecars")->required();

  auto* plan = app.add_subcommand("plan-dilution", "two-component dilution series planner");
  plan->fallthrough();
  double stock_pct = 0, diluent_pct = 0, mass = 0;
  double stock_density = 0, diluent_density = 0;
  std::vector<double> targets;
  std::string stock_label = "stock", diluent_label = "diluent";
  plan->add_option("--stock", stock_pct, "stock concentration [wt%]")->required();
  plan->add_option("--diluent", diluent_pct, "diluent concentration [wt%]")->required();
  plan->add_option("--target", targets, "target concentration [wt%], repeatable")->required();
  plan->add_option("--mass", mass, "mass per target [g]")->required();
  plan->add_option("--stock-label", stock_label, "stock name in the plan");
  plan->add_option("--diluent-label", diluent_label, "diluent name in the plan");
  plan->add_option("--stock-density", stock_density, "stock density [g/ml]");
  plan->add_option("--diluent-density", diluent_density, "diluent density [g/ml]");

  auto* psd = app.add_subcommand("psd", "pore size distribution from mask images");
  psd->fallthrough();
  std::string psd_dir;
  psd->add_option("dir", psd_dir, "directory of mask images (.png/.pgm) with .meta sidecars")
      ->required();

  auto* synth = app.add_subcommand("synth", "generate a synthetic demo campaign");
  synth->fallthrough();
  int positions = 3;
  double noise_frac = 0.005;
  bool with_creep = false;
  std::vector<double> wt;
  synth->add_option("--positions", positions, "test positions per sample");
  synth->add_option("--noise-frac", noise_frac, "noise sigma as a fraction of max stress");
  synth->add_flag("--with-creep", with_creep, "add one constant-stress hold per group");
  synth->add_option("--wt", wt, "polymer concentrations [wt%]");

  auto* campaign = app.add_subcommand("campaign", "batch-process a campaign manifest");
  campaign->fallthrough();
  std::string manifest_path;
  campaign->add_option("manifest", manifest_path, "campaign manifest (JSON)")->required();

  auto* trend = app.add_subcommand("trend", "refit trends from a property table");
  trend->fallthrough();
  std::string table_path;
  trend->add_option("table", table_path, "properties.csv or properties.jsonl")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*analyze) {
      return cmd_analyze(g, analyze_file);
    }
    if (*cv) {
      return cmd_cv(g, cv_dir);
    }
    if (*plan) {
      return cmd_plan(g, stock_pct, diluent_pct, targets, mass, stock_label,
                      diluent_label, stock_density, diluent_density);
    }
    if (*psd) {
      return cmd_psd(g, psd_dir);
    }
    if (*synth) {
      return cmd_synth(g, positions, noise_frac, with_creep, wt);
    }
    if (*campaign) {
      return cmd_campaign(g, manifest_path);
    }
    if (*trend) {
      return cmd_trend(g, table_path);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
