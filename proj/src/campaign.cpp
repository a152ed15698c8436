#include "membrane/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "membrane/fit.hpp"
#include "membrane/plot.hpp"
#include "membrane/props.hpp"
#include "membrane/quality.hpp"

namespace membrane {
namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

/// Everything a worker produces for one manifest entry. A failed stage sets
/// `error` and leaves the later fields empty; an aligned curve survives a
/// segmentation failure so the consistency report still sees it.
struct EntryOutcome {
  std::optional<SampleMeta> meta;
  std::string group;
  std::optional<StressStrainCurve> aligned;
  std::optional<SegmentationResult> seg;
  std::string seg_error;
  std::optional<MechanicalProperties> props;
  std::optional<ErrorRecord> error;
};

EntryOutcome process_entry(const SampleEntry& entry, const Config& config) {
  EntryOutcome out;
  SampleMeta meta;
  try {
    meta = parse_meta_file(entry.meta);
    meta.geometry.validate(config.ingest);
    out.group = humidity_group(meta.geometry, config.campaign.rh_threshold_pct);
  } catch (const std::exception& e) {
    out.error = ErrorRecord{entry.source, "meta", e.what()};
    return out;
  }
  out.meta = meta;

  RawCurve raw;
  try {
    raw = parse_force_displacement_file(entry.data, meta.sample_id);
    raw.position_index = meta.position_index;
    raw.validate();
  } catch (const std::exception& e) {
    out.error = ErrorRecord{entry.source, "parse", e.what()};
    return out;
  }

  try {
    out.aligned = align_contact(to_stress_strain(raw, meta.geometry), config.align);
  } catch (const std::exception& e) {
    out.error = ErrorRecord{entry.source, "align", e.what()};
    return out;
  }

  try {
    out.seg = segment_curve(*out.aligned, config.segment);
  } catch (const std::exception& e) {
    out.seg_error = e.what();
    out.error = ErrorRecord{entry.source, "segment", e.what()};
    return out;
  }

  try {
    out.props = extract_properties(*out.seg);
  } catch (const std::exception& e) {
    out.error = ErrorRecord{entry.source, "props", e.what()};
  }
  return out;
}

std::string join_reasons(const std::vector<std::string>& parts) {
  std::string out;
  for (const std::string& p : parts) {
    if (!out.empty()) {
      out += " | ";
    }
    out += p;
  }
  return out;
}

// Resolves p against base (unless already absolute) and cleans out "." / ".."
// components. lexically_normal leaves a trailing separator when the input ends
// in ".", so that is stripped as well.
std::filesystem::path resolve_under(const std::filesystem::path& base,
                                    const std::filesystem::path& p) {
  std::filesystem::path full = (p.is_absolute() ? p : base / p).lexically_normal();
  if (!full.has_filename() && full != full.root_path()) {
    full = full.parent_path();
  }
  return full;
}

void write_lines(const std::filesystem::path& path,
                 const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  for (const std::string& line : lines) {
    out << line << '\n';
  }
}

}  // namespace

CampaignManifest CampaignManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open manifest: " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) {
    throw std::runtime_error("manifest " + path.string() + " must be a JSON object");
  }
  const int version = doc.value("version", 1);
  if (version != 1) {
    throw std::runtime_error("unsupported manifest version " + std::to_string(version));
  }

  CampaignManifest m;
  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  m.root = resolve_under(base, doc.value("root", std::string(".")));
  m.output = resolve_under(m.root, doc.value("output", std::string("report")));

  if (!doc.contains("samples") || !doc["samples"].is_array()) {
    throw std::runtime_error("manifest " + path.string() + " is missing a 'samples' array");
  }
  for (const json& s : doc["samples"]) {
    if (!s.is_object() || !s.contains("data")) {
      throw std::runtime_error("manifest sample entries need a 'data' path");
    }
    SampleEntry e;
    e.source = s["data"].get<std::string>();
    e.data = resolve_under(m.root, std::filesystem::path(e.source));
    if (s.contains("meta")) {
      e.meta = resolve_under(m.root, std::filesystem::path(s["meta"].get<std::string>()));
    } else {
      e.meta = e.data;
      e.meta.replace_extension(".meta");
    }
    m.samples.push_back(std::move(e));
  }

  if (doc.contains("config")) {
    for (const auto& [key, value] : doc["config"].items()) {
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else {
        text = value.dump();
      }
      m.config_overrides.emplace_back(key, text);
    }
  }
  return m;
}

void CampaignManifest::validate() const {
  if (samples.empty()) {
    throw std::runtime_error("manifest has an empty sample set");
  }
  for (const SampleEntry& e : samples) {
    if (!std::filesystem::exists(e.data)) {
      throw std::runtime_error("manifest references a missing data file: " + e.data.string());
    }
    if (!std::filesystem::exists(e.meta)) {
      throw std::runtime_error("manifest references a missing metadata file: " + e.meta.string());
    }
  }
}

std::string humidity_group(const SampleGeometry& geom, double rh_threshold_pct) {
  if (geom.nitrogen_treated) {
    return "nitrogen";
  }
  if (geom.humidity_pct.has_value()) {
    return *geom.humidity_pct >= rh_threshold_pct ? "rh_ge_49" : "rh_lt_49";
  }
  throw std::invalid_argument(
      "sample records neither humidity nor a nitrogen flag; cannot assign a humidity group");
}

TrendFit fit_trend(const std::vector<std::pair<double, double>>& points,
                   const std::string& group, const std::string& response) {
  if (points.size() < 2) {
    throw std::invalid_argument("trend fit needs at least two points (group " + group + ")");
  }
  std::vector<double> x, y;
  x.reserve(points.size());
  y.reserve(points.size());
  for (const auto& [c, r] : points) {
    x.push_back(c);
    y.push_back(r);
  }
  LineFit line;
  try {
    line = fit_line(x, y);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("cannot fit " + response + " trend for group " + group + ": " + e.what());
  }
  TrendFit t;
  t.group = group;
  t.response = response;
  t.slope = line.slope;
  t.intercept = line.intercept;
  t.n = static_cast<int>(points.size());
  t.r_squared = line.r_squared;
  return t;
}

OutputFormat output_format_from_string(const std::string& name) {
  if (name == "csv") {
    return OutputFormat::csv;
  }
  if (name == "json-lines") {
    return OutputFormat::json_lines;
  }
  throw std::invalid_argument("unknown output format: " + name + " (expected csv or json-lines)");
}

CampaignResult run_campaign(const CampaignManifest& manifest, const Config& config,
                            const CampaignOptions& opts) {
  manifest.validate();

  const size_t n = manifest.samples.size();
  std::vector<EntryOutcome> outcomes(n);
  unsigned jobs = opts.jobs > 0 ? static_cast<unsigned>(opts.jobs)
                 : config.campaign.jobs > 0
                     ? static_cast<unsigned>(config.campaign.jobs)
                     : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(n));

  // Workers claim entries by atomic index and write results by slot; every
  // stage is pure, so ordering between workers cannot change any outcome.
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      outcomes[i] = process_entry(manifest.samples[i], config);
    }
  };
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) {
      pool.emplace_back(work);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }

  // Serial aggregation in input order keeps every output deterministic.
  CampaignResult result;
  for (const EntryOutcome& o : outcomes) {
    if (o.error) {
      result.errors.push_back(*o.error);
    }
    if (o.aligned && o.seg) {
      result.curves.push_back(CurveArtifact{*o.aligned, *o.seg});
    }
    if (o.props && o.meta) {
      PropertyRow row;
      row.sample_id = o.meta->sample_id;
      row.position = o.meta->position_index;
      row.wt_pct = o.meta->geometry.polymer_wt_pct;
      row.humidity_group = o.group;
      row.modulus_bar = o.props->elastic_modulus_bar;
      row.yield_bar = o.props->yield_strength_bar;
      row.pore_fraction = o.props->pore_fraction;
      row.creep_strain = o.props->creep_strain;
      row.flags = o.props->flags;
      result.properties.push_back(std::move(row));
    }
  }

  // Consistency + quality per sample, rows in first-appearance order.
  std::vector<std::string> sample_order;
  std::map<std::string, std::vector<const EntryOutcome*>> by_sample;
  for (const EntryOutcome& o : outcomes) {
    if (!o.meta || !o.aligned) {
      continue;
    }
    auto [it, inserted] = by_sample.try_emplace(o.meta->sample_id);
    if (inserted) {
      sample_order.push_back(o.meta->sample_id);
    }
    it->second.push_back(&o);
  }
  for (const std::string& id : sample_order) {
    const auto& group = by_sample[id];
    CvRow row;
    row.sample_id = id;
    row.n_curves = static_cast<int>(group.size());

    std::vector<std::string> notes;
    if (group.size() >= 2) {
      std::vector<StressStrainCurve> curves;
      curves.reserve(group.size());
      for (const EntryOutcome* o : group) {
        curves.push_back(*o->aligned);
      }
      try {
        row.cv = intra_sample_cv(curves, config.quality).cv;
      } catch (const std::exception& e) {
        notes.push_back(std::string("cv unavailable: ") + e.what());
      }
    }

    std::vector<SegmentationOutcome> seg_outcomes;
    seg_outcomes.reserve(group.size());
    for (const EntryOutcome* o : group) {
      SegmentationOutcome so;
      so.position_index = o->meta->position_index;
      so.result = o->seg;
      so.error = o->seg_error;
      seg_outcomes.push_back(std::move(so));
    }
    QualityReport quality = assess_quality(seg_outcomes, config.quality);
    row.passed = quality.sample_passed;
    for (const CurveAssessment& c : quality.curves) {
      if (c.passed) {
        continue;
      }
      std::string part = "p" + std::to_string(c.position_index) + ": ";
      for (size_t i = 0; i < c.reasons.size(); ++i) {
        if (i > 0) {
          part += "; ";
        }
        part += c.reasons[i];
      }
      notes.push_back(std::move(part));
    }
    row.reasons = join_reasons(notes);
    result.cv_rows.push_back(std::move(row));
  }

  // Trend fits per humidity group, alphabetical group order; groups with too
  // few points or no concentration spread are simply not reportable.
  std::map<std::string, std::vector<std::pair<double, double>>> modulus_points;
  std::map<std::string, std::vector<std::pair<double, double>>> pore_points;
  for (const PropertyRow& row : result.properties) {
    modulus_points[row.humidity_group].emplace_back(row.wt_pct, row.modulus_bar);
    pore_points[row.humidity_group].emplace_back(row.wt_pct, row.pore_fraction);
  }
  for (const auto& [group, pts] : modulus_points) {
    try {
      result.trends.push_back(fit_trend(pts, group, "elastic_modulus"));
    } catch (const std::invalid_argument&) {
    }
    try {
      result.trends.push_back(fit_trend(pore_points[group], group, "pore_fraction"));
    } catch (const std::invalid_argument&) {
    }
  }
  return result;
}

void write_campaign_outputs(const CampaignResult& result,
                            const std::filesystem::path& out_dir,
                            const CampaignOptions& opts) {
  std::filesystem::create_directories(out_dir);
  const bool as_csv = opts.format == OutputFormat::csv;

  std::vector<std::string> lines;
  if (as_csv) {
    lines.push_back("# schema: membrane-mech properties v1");
    lines.push_back("sample_id,position,wt_pct,humidity_group,modulus_bar,yield_bar,pore_fraction,creep_strain,flags");
  }
  for (const PropertyRow& r : result.properties) {
    if (as_csv) {
      lines.push_back(csv_quote(r.sample_id) + "," + std::to_string(r.position) + "," +
                      fmt(r.wt_pct) + "," + r.humidity_group + "," + fmt(r.modulus_bar) +
                      "," + fmt(r.yield_bar) + "," + fmt(r.pore_fraction) + "," +
                      (r.creep_strain ? fmt(*r.creep_strain) : std::string()) + "," +
                      csv_quote(join_flags(r.flags)));
    } else {
      json j;
      j["sample_id"] = r.sample_id;
      j["position"] = r.position;
      j["wt_pct"] = r.wt_pct;
      j["humidity_group"] = r.humidity_group;
      j["modulus_bar"] = r.modulus_bar;
      j["yield_bar"] = r.yield_bar;
      j["pore_fraction"] = r.pore_fraction;
      if (r.creep_strain) {
        j["creep_strain"] = *r.creep_strain;
      }
      j["flags"] = json::array();
      for (CurveFlag f : r.flags) {
        j["flags"].push_back(to_string(f));
      }
      lines.push_back(j.dump());
    }
  }
  write_lines(out_dir / (as_csv ? "properties.csv" : "properties.jsonl"), lines);

  lines.clear();
  if (as_csv) {
    lines.push_back("# schema: membrane-mech cv v1");
    lines.push_back("sample_id,n_curves,cv,passed,reasons");
  }
  for (const CvRow& r : result.cv_rows) {
    if (as_csv) {
      lines.push_back(csv_quote(r.sample_id) + "," + std::to_string(r.n_curves) + "," +
                      (r.cv ? fmt(*r.cv) : std::string()) + "," +
                      (r.passed ? "true" : "false") + "," + csv_quote(r.reasons));
    } else {
      json j;
      j["sample_id"] = r.sample_id;
      j["n_curves"] = r.n_curves;
      if (r.cv) {
        j["cv"] = *r.cv;
      }
      j["passed"] = r.passed;
      j["reasons"] = r.reasons;
      lines.push_back(j.dump());
    }
  }
  write_lines(out_dir / (as_csv ? "cv.csv" : "cv.jsonl"), lines);

  lines.clear();
  if (as_csv) {
    lines.push_back("# schema: membrane-mech trends v1");
    lines.push_back("group,response,slope,intercept,n,r_squared");
  }
  for (const TrendFit& t : result.trends) {
    if (as_csv) {
      lines.push_back(t.group + "," + t.response + "," + fmt(t.slope) + "," +
                      fmt(t.intercept) + "," + std::to_string(t.n) + "," +
                      fmt(t.r_squared));
    } else {
      json j;
      j["group"] = t.group;
      j["response"] = t.response;
      j["slope"] = t.slope;
      j["intercept"] = t.intercept;
      j["n"] = t.n;
      j["r_squared"] = t.r_squared;
      lines.push_back(j.dump());
    }
  }
  write_lines(out_dir / (as_csv ? "trends.csv" : "trends.jsonl"), lines);

  lines.clear();
  if (as_csv) {
    lines.push_back("# schema: membrane-mech errors v1");
    lines.push_back("source,stage,message");
  }
  for (const ErrorRecord& e : result.errors) {
    if (as_csv) {
      lines.push_back(csv_quote(e.source) + "," + e.stage + "," + csv_quote(e.message));
    } else {
      json j;
      j["source"] = e.source;
      j["stage"] = e.stage;
      j["message"] = e.message;
      lines.push_back(j.dump());
    }
  }
  write_lines(out_dir / (as_csv ? "errors.csv" : "errors.jsonl"), lines);

  lines.clear();
  for (const CurveArtifact& c : result.curves) {
    lines.push_back(to_json(c.seg).dump());
  }
  write_lines(out_dir / "segments.jsonl", lines);

  if (!opts.write_plots) {
    return;
  }
  if (!result.properties.empty()) {
    std::map<std::string, TrendSeries> mod_series, pore_series;
    for (const PropertyRow& r : result.properties) {
      auto& ms = mod_series[r.humidity_group];
      auto& ps = pore_series[r.humidity_group];
      if (ms.label.empty()) {
        ms.label = r.humidity_group;
        ms.color = group_color(r.humidity_group);
        ps.label = r.humidity_group;
        ps.color = ms.color;
      }
      ms.points.emplace_back(r.wt_pct, r.modulus_bar);
      ps.points.emplace_back(r.wt_pct, r.pore_fraction);
    }
    for (const TrendFit& t : result.trends) {
      auto& series = t.response == "elastic_modulus" ? mod_series : pore_series;
      auto it = series.find(t.group);
      if (it != series.end()) {
        it->second.has_line = true;
        it->second.slope = t.slope;
        it->second.intercept = t.intercept;
      }
    }
    std::vector<TrendSeries> mods, pores;
    for (auto& [g, s] : mod_series) {
      mods.push_back(std::move(s));
    }
    for (auto& [g, s] : pore_series) {
      pores.push_back(std::move(s));
    }
    write_overview_svg(out_dir / "overview.svg", mods, pores);
  }
  for (const CurveArtifact& c : result.curves) {
    const std::string name =
        c.curve.sample_id + "-p" + std::to_string(c.curve.position_index) + ".svg";
    write_curve_svg(out_dir / name, c.curve, c.seg);
  }
}

}  // namespace membrane
