#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "membrane/campaign.hpp"
#include "membrane/synth.hpp"

using namespace membrane;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("membrane-campaign-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

SampleGeometry geom_with(std::optional<double> humidity, bool nitrogen) {
  SampleGeometry g;
  g.pin_diameter_mm = 5.0;
  g.thickness_um = 100.0;
  g.polymer_wt_pct = 12.0;
  g.humidity_pct = humidity;
  g.nitrogen_treated = nitrogen;
  return g;
}

/// Small but fully populated demo campaign shared by the run tests.
fs::path demo_campaign(const std::string& name, bool with_creep = false) {
  CampaignSynthOptions opts;
  opts.seed = 11;
  opts.wt_pct = {10, 12};
  opts.positions = 2;
  opts.with_creep = with_creep;
  return generate_demo_campaign(fresh_dir(name), opts);
}

const TrendFit* find_trend(const CampaignResult& result, const std::string& group,
                           const std::string& response) {
  for (const TrendFit& t : result.trends) {
    if (t.group == group && t.response == response) {
      return &t;
    }
  }
  return nullptr;
}

}  // namespace

TEST_CASE("humidity grouping") {
  const CampaignConfig cfg;
  CHECK(humidity_group(geom_with(62.0, false), cfg.rh_threshold_pct) == "rh_ge_49");
  CHECK(humidity_group(geom_with(35.0, false), cfg.rh_threshold_pct) == "rh_lt_49");
  CHECK(humidity_group(geom_with(49.0, false), cfg.rh_threshold_pct) == "rh_ge_49");
  CHECK(humidity_group(geom_with(48.999, false), cfg.rh_threshold_pct) ==
        "rh_lt_49");
  // Nitrogen storage wins over any recorded humidity.
  CHECK(humidity_group(geom_with(62.0, true), cfg.rh_threshold_pct) == "nitrogen");
  CHECK(humidity_group(geom_with(std::nullopt, true), cfg.rh_threshold_pct) ==
        "nitrogen");
  CHECK_THROWS_AS(humidity_group(geom_with(std::nullopt, false), 49.0),
                  std::invalid_argument);
  // A custom threshold moves the boundary, not the labels.
  CHECK(humidity_group(geom_with(62.0, false), 70.0) == "rh_lt_49");
}

TEST_CASE("manifest loading resolves paths and defaults") {
  const fs::path manifest_path = demo_campaign("manifest");
  const CampaignManifest m = CampaignManifest::load(manifest_path);
  CHECK(m.root == manifest_path.parent_path());
  CHECK(m.output == manifest_path.parent_path() / "report");
  REQUIRE(m.samples.size() == 12);
  CHECK_NOTHROW(m.validate());
  for (const SampleEntry& e : m.samples) {
    CHECK(e.data.is_absolute());
    CHECK(e.meta == fs::path(e.data).replace_extension(".meta"));
  }
}

TEST_CASE("manifest corner cases") {
  const fs::path dir = fresh_dir("manifest-edge");

  SUBCASE("meta defaults to the data basename") {
    std::ofstream(dir / "m.json")
        << R"({"version":1,"samples":[{"data":"x.csv"}],)"
        << R"("config":{"segment.min_r2":0.9,"campaign.jobs":2}})";
    const CampaignManifest m = CampaignManifest::load(dir / "m.json");
    REQUIRE(m.samples.size() == 1);
    CHECK(m.samples[0].data == dir / "x.csv");
    CHECK(m.samples[0].meta == dir / "x.meta");
    REQUIRE(m.config_overrides.size() == 2);
    // Referenced files do not exist, so validation must complain.
    CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("x.csv"),
                         std::runtime_error);

    Config cfg;
    for (const auto& [key, value] : m.config_overrides) {
      cfg.apply(key, value);
    }
    CHECK(cfg.segment.min_r2 == 0.9);
    CHECK(cfg.campaign.jobs == 2);
  }

  SUBCASE("bad version is rejected") {
    std::ofstream(dir / "v.json") << R"({"version":2,"samples":[{"data":"x.csv"}]})";
    CHECK_THROWS_AS(CampaignManifest::load(dir / "v.json"), std::runtime_error);
  }

  SUBCASE("empty sample list is rejected") {
    std::ofstream(dir / "e.json") << R"({"version":1,"samples":[]})";
    CHECK_THROWS_AS(CampaignManifest::load(dir / "e.json").validate(),
                    std::runtime_error);
  }

  SUBCASE("malformed json mentions the file") {
    std::ofstream(dir / "b.json") << "{not json";
    CHECK_THROWS_WITH_AS(CampaignManifest::load(dir / "b.json"),
                         doctest::Contains("b.json"), std::runtime_error);
  }
}

TEST_CASE("trend fitting") {
  const TrendFit t = fit_trend({{10.0, 100.0}, {17.0, 170.0}}, "nitrogen",
                               "elastic_modulus");
  CHECK(t.slope == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(t.intercept == doctest::Approx(0.0));
  CHECK(t.r_squared == doctest::Approx(1.0));
  CHECK(t.n == 2);
  CHECK(t.group == "nitrogen");

  CHECK_THROWS_AS(fit_trend({{10.0, 1.0}}, "g", "elastic_modulus"),
                  std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      fit_trend({{10.0, 1.0}, {10.0, 2.0}}, "g", "pore_fraction"),
      doctest::Contains("pore_fraction"), std::invalid_argument);
}

TEST_CASE("a full campaign runs clean and deterministically") {
  const fs::path manifest_path = demo_campaign("run");
  const CampaignManifest manifest = CampaignManifest::load(manifest_path);
  const Config cfg;
  CampaignOptions opts;
  opts.jobs = 3;
  const CampaignResult result = run_campaign(manifest, cfg, opts);

  CHECK(result.clean());
  CHECK(result.errors.empty());
  REQUIRE(result.properties.size() == 12);
  REQUIRE(result.cv_rows.size() == 6);
  CHECK(result.curves.size() == 12);

  // Input order is preserved regardless of worker scheduling.
  CHECK(result.properties.front().sample_id == "humid-w10");
  CHECK(result.properties.front().position == 1);
  CHECK(result.properties.back().sample_id == "nitro-w12");

  for (const PropertyRow& r : result.properties) {
    CHECK(r.modulus_bar > 0);
    CHECK(r.yield_bar > 0);
    CHECK(r.pore_fraction > 0.4);
    CHECK(r.pore_fraction < 0.9);
    CHECK_FALSE(r.creep_strain.has_value());
  }
  for (const CvRow& r : result.cv_rows) {
    CHECK(r.n_curves == 2);
    REQUIRE(r.cv.has_value());
    CHECK(r.passed);
  }

  for (const std::string group : {"rh_ge_49", "rh_lt_49", "nitrogen"}) {
    const TrendFit* mod = find_trend(result, group, "elastic_modulus");
    REQUIRE(mod != nullptr);
    CHECK(mod->slope > 0);
    CHECK(mod->n == 4);
    const TrendFit* pore = find_trend(result, group, "pore_fraction");
    REQUIRE(pore != nullptr);
    CHECK(pore->slope < 0);
  }

  const CampaignResult again = run_campaign(manifest, cfg, opts);
  REQUIRE(again.properties.size() == result.properties.size());
  for (std::size_t i = 0; i < result.properties.size(); ++i) {
    CHECK(again.properties[i].modulus_bar == result.properties[i].modulus_bar);
    CHECK(again.properties[i].pore_fraction == result.properties[i].pore_fraction);
  }
}

TEST_CASE("one corrupt input does not sink the rest") {
  const fs::path manifest_path = demo_campaign("corrupt");
  const fs::path bad = manifest_path.parent_path() / "dry-w10-p1.csv";
  REQUIRE(fs::exists(bad));
  std::ofstream(bad) << "time_s,force_N\n0.1,2.0\n";  // displacement column gone

  const CampaignManifest manifest = CampaignManifest::load(manifest_path);
  const CampaignResult result = run_campaign(manifest, Config{});

  CHECK_FALSE(result.clean());
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].stage == "parse");
  CHECK(result.errors[0].source.find("dry-w10-p1.csv") != std::string::npos);
  CHECK(result.properties.size() == 11);
  CHECK(result.curves.size() == 11);

  // The survivor keeps its replicate row, now with a single curve.
  const auto row = std::find_if(
      result.cv_rows.begin(), result.cv_rows.end(),
      [](const CvRow& r) { return r.sample_id == "dry-w10"; });
  REQUIRE(row != result.cv_rows.end());
  CHECK(row->n_curves == 1);
  CHECK_FALSE(row->cv.has_value());
}

TEST_CASE("campaign outputs land in the expected files") {
  const fs::path manifest_path = demo_campaign("outputs", true);
  const CampaignManifest manifest = CampaignManifest::load(manifest_path);
  const CampaignResult result = run_campaign(manifest, Config{});
  REQUIRE(result.clean());

  const fs::path out_a = fresh_dir("outputs-a");
  write_campaign_outputs(result, out_a);

  for (const char* name : {"properties.csv", "cv.csv", "trends.csv", "errors.csv",
                           "segments.jsonl", "overview.svg"}) {
    CHECK(fs::exists(out_a / name));
  }
  const std::string props = slurp(out_a / "properties.csv");
  CHECK(props.find("# schema: membrane-mech properties v1") == 0);
  CHECK(count_lines(props) == 2 + result.properties.size());
  CHECK(count_lines(slurp(out_a / "segments.jsonl")) == result.curves.size());

  for (const CurveArtifact& c : result.curves) {
    const fs::path svg =
        out_a / (c.curve.sample_id + "-p" +
                 std::to_string(c.curve.position_index) + ".svg");
    CHECK(fs::exists(svg));
  }

  // The creep sample carries its extra region band and property column.
  const std::string creep_svg = slurp(out_a / "humid-w10-p1.svg");
  CHECK(creep_svg.find("region-creep") != std::string::npos);
  const auto creep_row = std::find_if(
      result.properties.begin(), result.properties.end(),
      [](const PropertyRow& r) {
        return r.sample_id == "humid-w10" && r.position == 1;
      });
  REQUIRE(creep_row != result.properties.end());
  CHECK(creep_row->creep_strain.has_value());

  // Byte-stable across repeated writes.
  const fs::path out_b = fresh_dir("outputs-b");
  write_campaign_outputs(result, out_b);
  for (const auto& entry : fs::directory_iterator(out_a)) {
    CHECK(slurp(entry.path()) == slurp(out_b / entry.path().filename()));
  }
}

TEST_CASE("json lines output parses") {
  const fs::path manifest_path = demo_campaign("jsonl");
  const CampaignManifest manifest = CampaignManifest::load(manifest_path);
  const CampaignResult result = run_campaign(manifest, Config{});

  const fs::path out = fresh_dir("jsonl-out");
  CampaignOptions opts;
  opts.format = OutputFormat::json_lines;
  opts.write_plots = false;
  write_campaign_outputs(result, out, opts);

  CHECK(fs::exists(out / "properties.jsonl"));
  CHECK_FALSE(fs::exists(out / "properties.csv"));
  CHECK_FALSE(fs::exists(out / "overview.svg"));

  std::ifstream in(out / "properties.jsonl");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const nlohmann::json row = nlohmann::json::parse(line);
    CHECK(row.contains("sample_id"));
    CHECK(row.contains("modulus_bar"));
    CHECK(row.contains("pore_fraction"));
    ++rows;
  }
  CHECK(rows == result.properties.size());
}
