#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "membrane/config.hpp"
#include "membrane/ingest.hpp"
#include "membrane/segment.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// One measurement file plus its metadata sidecar, paths already resolved
/// against the manifest root. `source` keeps the path as written in the
/// manifest for error reporting.
struct SampleEntry {
  std::filesystem::path data;
  std::filesystem::path meta;
  std::string source;
};

/// JSON manifest describing a batch run:
///   {"version": 1, "root": ".", "output": "report",
///    "samples": [{"data": "a-p1.csv", "meta": "a-p1.meta"}, ...],
///    "config": {"segment.min_r2": 0.9}}
/// `meta` defaults to the data path with a .meta extension; `root` is
/// resolved against the manifest's directory.
struct CampaignManifest {
  std::filesystem::path root;
  std::filesystem::path output;
  std::vector<SampleEntry> samples;
  std::vector<std::pair<std::string, std::string>> config_overrides;

  static CampaignManifest load(const std::filesystem::path& path);

  /// Checks every referenced file exists and the sample set is non-empty.
  void validate() const;
};

/// Group label for trend analysis: "nitrogen" when the sample was dried under
/// nitrogen (takes precedence), otherwise "rh_ge_49" / "rh_lt_49" by casting
/// humidity. Throws when neither humidity nor the nitrogen flag is recorded.
std::string humidity_group(const SampleGeometry& geom, double rh_threshold_pct);

/// One row of properties.csv.
struct PropertyRow {
  std::string sample_id;
  int position = 1;
  double wt_pct = 0;
  std::string humidity_group;
  double modulus_bar = 0;
  double yield_bar = 0;
  double pore_fraction = 0;
  std::optional<double> creep_strain;
  FlagSet flags;
};

/// One row of errors.csv: a stage-tagged failure for a single input file.
/// Stages: meta, parse, align, segment, props.
struct ErrorRecord {
  std::string source;
  std::string stage;
  std::string message;
};

/// One row of cv.csv. `cv` is empty when fewer than two curves aligned or
/// their stress ranges do not overlap.
struct CvRow {
  std::string sample_id;
  int n_curves = 0;
  std::optional<double> cv;
  bool passed = false;
  std::string reasons;
};

/// Least-squares trend of one response against polymer concentration within
/// one humidity group.
struct TrendFit {
  std::string group;
  std::string response;  ///< "elastic_modulus" or "pore_fraction"
  double slope = 0;
  double intercept = 0;
  int n = 0;
  double r_squared = 0;
};

/// Ordinary least squares over (wt_pct, response) points. Throws on fewer
/// than two points or zero concentration variance.
TrendFit fit_trend(const std::vector<std::pair<double, double>>& points,
                   const std::string& group, const std::string& response);

/// Aligned curve plus its segmentation, kept for plots and segments.jsonl.
struct CurveArtifact {
  StressStrainCurve curve;
  SegmentationResult seg;
};

struct CampaignResult {
  std::vector<PropertyRow> properties;
  std::vector<CvRow> cv_rows;
  std::vector<TrendFit> trends;
  std::vector<ErrorRecord> errors;
  std::vector<CurveArtifact> curves;  ///< fully processed entries, input order

  bool clean() const { return errors.empty(); }
};

enum class OutputFormat { csv, json_lines };
OutputFormat output_format_from_string(const std::string& name);

struct CampaignOptions {
  int jobs = 0;  ///< worker threads; 0 = logical cores
  OutputFormat format = OutputFormat::csv;
  bool write_plots = true;
};

/// Runs ingest, alignment, segmentation and property extraction for every
/// manifest entry on a worker pool, then aggregates consistency, quality and
/// trend results serially in input order. Entry failures become error
/// records; they never abort the batch.
CampaignResult run_campaign(const CampaignManifest& manifest, const Config& config,
                            const CampaignOptions& opts = {});

/// Writes properties/cv/trends/errors tables (.csv or .jsonl), a
/// segments.jsonl record stream and, unless disabled, overview.svg plus one
/// annotated SVG per curve. Output is byte-deterministic for a fixed result.
void write_campaign_outputs(const CampaignResult& result,
                            const std::filesystem::path& out_dir,
                            const CampaignOptions& opts = {});

}  // namespace membrane
