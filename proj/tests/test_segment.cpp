#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "membrane/fit.hpp"
#include "membrane/ingest.hpp"
#include "membrane/segment.hpp"
#include "membrane/synth.hpp"

using namespace membrane;

namespace {

StressStrainCurve line_curve(int n, double slope, double max_strain = 1.0) {
  StressStrainCurve c;
  c.sample_id = "line";
  for (int i = 0; i < n; ++i) {
    const double e = max_strain * i / (n - 1);
    c.points.push_back({e, slope * e, 0.1 * (i + 1)});
  }
  return c;
}

StressStrainCurve aligned_synth(const CurveSpec& spec) {
  const SyntheticCurve s = generate_curve(spec);
  return align_contact(to_stress_strain(s.raw, s.meta.geometry));
}

StressStrainCurve scaled_stress(const StressStrainCurve& c, double k) {
  StressStrainCurve out = c;
  for (CurvePoint& p : out.points) {
    p.stress_bar *= k;
  }
  return out;
}

}  // namespace

TEST_CASE("least-squares line fit basics") {
  const LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1.0}, {2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_line({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("piecewise fit reproduces an exact two-knot polyline") {
  // Kink at 0.3 and 0.7: slopes 100, 10, 300.
  std::vector<double> xs, ys;
  for (int i = 0; i <= 200; ++i) {
    const double x = i / 200.0;
    double y = 100 * std::min(x, 0.3) + 10 * std::clamp(x - 0.3, 0.0, 0.4) +
               300 * std::max(x - 0.7, 0.0);
    xs.push_back(x);
    ys.push_back(y);
  }
  const PiecewiseLinearFit f = fit_piecewise_linear(xs, ys, {0.3, 0.7});
  CHECK(f.sse < 1e-18);
  CHECK(f.segment_slope(0) == doctest::Approx(100).epsilon(1e-9));
  CHECK(f.segment_slope(1) == doctest::Approx(10).epsilon(1e-9));
  CHECK(f.segment_slope(2) == doctest::Approx(300).epsilon(1e-9));
  // Segment lines agree at the knots (continuity of the model).
  CHECK(f.segment_line(0).at(0.3) == doctest::Approx(f.segment_line(1).at(0.3)));
  CHECK(f.segment_line(1).at(0.7) == doctest::Approx(f.segment_line(2).at(0.7)));
}

TEST_CASE("smoother reproduces a line exactly") {
  const DerivativeProfile p = smooth_and_differentiate(line_curve(200, 100.0));
  REQUIRE(p.strain.size() == 512);
  const size_t trim = 512 / 20;
  for (size_t i = trim; i + trim < p.strain.size(); ++i) {
    CHECK(std::abs(p.d1[i] - 100.0) < 1e-6);
    CHECK(std::abs(p.d2[i]) < 1e-3);
    CHECK(std::abs(p.stress[i] - 100.0 * p.strain[i]) < 1e-8);
  }
}

TEST_CASE("smoother recovers the curvature of a parabola") {
  StressStrainCurve c;
  for (int i = 0; i < 300; ++i) {
    const double e = i / 299.0;
    c.points.push_back({e, 50.0 * e * e, 0.1 * (i + 1)});
  }
  const DerivativeProfile p = smooth_and_differentiate(c);
  const size_t trim = 512 / 20;
  for (size_t i = trim; i + trim < p.strain.size(); ++i) {
    CHECK(p.d2[i] == doctest::Approx(100.0).epsilon(0.01));
  }
}

TEST_CASE("degenerate strain span is rejected") {
  StressStrainCurve c;
  for (int i = 0; i < 20; ++i) {
    c.points.push_back({0.5, 1.0 * i, 0.1 * (i + 1)});
  }
  CHECK_THROWS_WITH_AS(smooth_and_differentiate(c),
                       doctest::Contains("degenerate"), std::runtime_error);
}

TEST_CASE("curvature peaks sit at the true corners of a noiseless trilinear curve") {
  CurveSpec spec;  // corners at 0.15 and 0.57
  const DerivativeProfile p = smooth_and_differentiate(aligned_synth(spec));
  const double step = p.strain[1] - p.strain[0];

  // The two largest local |d2| maxima, at least 0.05 strain apart.
  std::vector<std::pair<double, double>> peaks;  // (magnitude, strain)
  for (size_t i = 1; i + 1 < p.d2.size(); ++i) {
    const double m = std::abs(p.d2[i]);
    if (m >= std::abs(p.d2[i - 1]) && m > std::abs(p.d2[i + 1])) {
      peaks.emplace_back(m, p.strain[i]);
    }
  }
  std::sort(peaks.rbegin(), peaks.rend());
  std::vector<double> top;
  for (const auto& [m, e] : peaks) {
    bool clear = true;
    for (double t : top) {
      clear = clear && std::abs(t - e) > 0.05;
    }
    if (clear) {
      top.push_back(e);
    }
    if (top.size() == 2) {
      break;
    }
  }
  REQUIRE(top.size() == 2);
  std::sort(top.begin(), top.end());
  CHECK(std::abs(top[0] - spec.yield_strain) <= 2 * step);
  CHECK(std::abs(top[1] - spec.densification_onset_strain) <= 2 * step);
}

TEST_CASE("breakpoints of a noiseless trilinear curve are exact to 1e-3") {
  CurveSpec spec;
  const StressStrainCurve c = aligned_synth(spec);
  const std::vector<double> b = find_breakpoints(smooth_and_differentiate(c), 2);
  REQUIRE(b.size() == 2);
  CHECK(std::abs(b[0] - spec.yield_strain) < 1e-3);
  CHECK(std::abs(b[1] - spec.densification_onset_strain) < 1e-3);
}

TEST_CASE("a straight line has no breakpoints to find") {
  const StressStrainCurve c = line_curve(100, 150.0);
  CHECK_THROWS_WITH_AS(find_breakpoints(smooth_and_differentiate(c), 2),
                       doctest::Contains("segmentation failure"), SegmentationError);
  CHECK_THROWS_AS(segment_curve(c), SegmentationError);
}

TEST_CASE("a line with instrument noise still fails segmentation") {
  StressStrainCurve c = line_curve(400, 150.0);
  GaussianSource g(5);
  for (CurvePoint& p : c.points) {
    p.stress_bar += 0.15 * g.next();
  }
  CHECK_THROWS_WITH_AS(segment_curve(c), doctest::Contains("segmentation failure"),
                       SegmentationError);
}

TEST_CASE("n_break outside {2,3} is rejected") {
  const DerivativeProfile p = smooth_and_differentiate(aligned_synth(CurveSpec{}));
  CHECK_THROWS_AS(find_breakpoints(p, 1), std::invalid_argument);
  CHECK_THROWS_AS(find_breakpoints(p, 4), std::invalid_argument);
}

TEST_CASE("segmentation labels three ordered contiguous regions") {
  CurveSpec spec;
  spec.elastic_modulus_bar = 166.1;
  spec.densification_onset_strain = 0.57;
  const StressStrainCurve c = aligned_synth(spec);
  const SegmentationResult seg = segment_curve(c);

  CHECK(seg.sample_id == c.sample_id);
  CHECK_FALSE(seg.has_creep);
  REQUIRE(seg.regions.size() == 3);
  REQUIRE(seg.breakpoints.size() == 2);
  CHECK(seg.regions[0].label == RegionLabel::elastic);
  CHECK(seg.regions[1].label == RegionLabel::plateau);
  CHECK(seg.regions[2].label == RegionLabel::densification);

  CHECK(seg.regions[0].strain_begin == doctest::Approx(c.strain_min()));
  CHECK(seg.regions[0].strain_end == seg.breakpoints[0]);
  CHECK(seg.regions[1].strain_begin == seg.breakpoints[0]);
  CHECK(seg.regions[1].strain_end == seg.breakpoints[1]);
  CHECK(seg.regions[2].strain_begin == seg.breakpoints[1]);
  CHECK(seg.regions[2].strain_end == doctest::Approx(c.strain_max()));
  CHECK(seg.breakpoints[0] < seg.breakpoints[1]);
  for (const RegionFit& r : seg.regions) {
    CHECK(r.line.n >= 4);
    CHECK(r.line.r_squared >= 0.95);
  }
  CHECK(seg.flags.empty());

  CHECK(seg.regions[0].line.slope == doctest::Approx(166.1).epsilon(0.02));
  CHECK(seg.breakpoints[1] == doctest::Approx(0.57).epsilon(0.02));
}

TEST_CASE("zero-noise slopes are recovered to 0.1 percent") {
  CurveSpec spec;
  const SyntheticCurve s = generate_curve(spec);
  const SegmentationResult seg =
      segment_curve(align_contact(to_stress_strain(s.raw, s.meta.geometry)));
  CHECK(seg.regions[0].line.slope ==
        doctest::Approx(s.truth.elastic_modulus_bar).epsilon(0.001));
  CHECK(seg.regions[1].line.slope ==
        doctest::Approx(s.truth.plateau_slope_bar).epsilon(0.001));
  CHECK(seg.regions[2].line.slope ==
        doctest::Approx(s.truth.densification_slope_bar).epsilon(0.001));
}

TEST_CASE("breakpoints survive one percent noise") {
  CurveSpec spec;
  spec.seed = 1234;
  spec.noise_sigma_bar = 0.01 * trilinear_stress(spec, spec.effective_max_strain());
  const SegmentationResult seg = segment_curve(aligned_synth(spec));
  CHECK(std::abs(seg.breakpoints[0] - spec.yield_strain) < 0.02);
  CHECK(std::abs(seg.breakpoints[1] - spec.densification_onset_strain) < 0.02);
}

TEST_CASE("stress scaling by powers of two leaves breakpoints bit-identical") {
  CurveSpec spec;
  spec.noise_sigma_bar = 0.2;
  spec.seed = 3;
  const StressStrainCurve base = aligned_synth(spec);
  const SegmentationResult ref = segment_curve(base);
  for (double k : {0.5, 2.0}) {
    const SegmentationResult seg = segment_curve(scaled_stress(base, k));
    REQUIRE(seg.breakpoints.size() == ref.breakpoints.size());
    for (size_t i = 0; i < ref.breakpoints.size(); ++i) {
      CHECK(seg.breakpoints[i] == ref.breakpoints[i]);
    }
    for (size_t i = 0; i < ref.regions.size(); ++i) {
      CHECK(seg.regions[i].line.slope == k * ref.regions[i].line.slope);
    }
  }
}

TEST_CASE("segmentation is deterministic") {
  CurveSpec spec;
  spec.noise_sigma_bar = 0.3;
  spec.seed = 17;
  const SegmentationResult a = segment_curve(aligned_synth(spec));
  const SegmentationResult b = segment_curve(aligned_synth(spec));
  REQUIRE(a.breakpoints.size() == b.breakpoints.size());
  for (size_t i = 0; i < a.breakpoints.size(); ++i) {
    CHECK(a.breakpoints[i] == b.breakpoints[i]);
  }
  CHECK(a.regions[0].line.slope == b.regions[0].line.slope);
}

TEST_CASE("constant-stress holds become a creep region") {
  CurveSpec spec;
  spec.noise_sigma_bar = 0.1;
  spec.seed = 11;
  const double onset_stress = trilinear_stress(spec, spec.densification_onset_strain);
  spec.creep = CreepSpec{1.5 * onset_stress, 30.0, 0.03};
  const SyntheticCurve s = generate_curve(spec);
  const StressStrainCurve c = align_contact(to_stress_strain(s.raw, s.meta.geometry));
  const SegmentationResult seg = segment_curve(c);

  CHECK(seg.has_creep);
  REQUIRE(seg.regions.size() == 4);
  REQUIRE(seg.breakpoints.size() == 3);
  CHECK(seg.regions[3].label == RegionLabel::creep);
  CHECK(seg.creep_start_time > 0);
  // The creep fit is strain versus time: positive creep rate, tiny slope
  // relative to any stress-strain fit.
  CHECK(seg.regions[3].line.slope > 0);
  // The detector may start a few samples before the hold proper: its stress
  // window is 1% of max stress, about 0.0014 strain on this ramp.
  CHECK(seg.regions[3].strain_end - seg.regions[3].strain_begin ==
        doctest::Approx(0.03).epsilon(0.1));
  CHECK(seg.regions[3].strain_end == doctest::Approx(c.strain_max()));
  const RegionFit* creep = seg.region(RegionLabel::creep);
  REQUIRE(creep != nullptr);
  CHECK(creep->label == RegionLabel::creep);
}

TEST_CASE("a short plateau is flagged as not distinct") {
  CurveSpec spec;
  spec.elastic_modulus_bar = 200;
  spec.yield_strain = 0.53;
  spec.densification_onset_strain = 0.56;
  spec.max_strain = 0.8;
  const SegmentationResult seg = segment_curve(aligned_synth(spec));
  CHECK(seg.flags.count(CurveFlag::no_plateau) == 1);
}

TEST_CASE("slope-order violation is flagged not fatal") {
  // Slopes 100 then 150 then 400: the middle segment is not a plateau.
  StressStrainCurve c;
  for (int i = 0; i <= 400; ++i) {
    const double e = i / 400.0;
    const double s = 100 * std::min(e, 0.3) + 150 * std::clamp(e - 0.3, 0.0, 0.4) +
                     400 * std::max(e - 0.7, 0.0);
    c.points.push_back({e, s, 0.1 * (i + 1)});
  }
  const SegmentationResult seg = segment_curve(c);
  CHECK(seg.flags.count(CurveFlag::slope_order_violation) == 1);
}

TEST_CASE("segmentation results round-trip through JSON") {
  CurveSpec spec;
  spec.noise_sigma_bar = 0.05;
  spec.seed = 9;
  const double onset_stress = trilinear_stress(spec, spec.densification_onset_strain);
  spec.creep = CreepSpec{1.5 * onset_stress, 30.0, 0.02};
  const SyntheticCurve s = generate_curve(spec);
  const SegmentationResult seg =
      segment_curve(align_contact(to_stress_strain(s.raw, s.meta.geometry)));

  const SegmentationResult back = segmentation_from_json(to_json(seg));
  CHECK(back.sample_id == seg.sample_id);
  CHECK(back.position_index == seg.position_index);
  CHECK(back.has_creep == seg.has_creep);
  CHECK(back.creep_start_time == seg.creep_start_time);
  REQUIRE(back.breakpoints.size() == seg.breakpoints.size());
  for (size_t i = 0; i < seg.breakpoints.size(); ++i) {
    CHECK(back.breakpoints[i] == seg.breakpoints[i]);
  }
  REQUIRE(back.regions.size() == seg.regions.size());
  for (size_t i = 0; i < seg.regions.size(); ++i) {
    CHECK(back.regions[i].label == seg.regions[i].label);
    CHECK(back.regions[i].strain_begin == seg.regions[i].strain_begin);
    CHECK(back.regions[i].strain_end == seg.regions[i].strain_end);
    CHECK(back.regions[i].line.slope == seg.regions[i].line.slope);
    CHECK(back.regions[i].line.intercept == seg.regions[i].line.intercept);
    CHECK(back.regions[i].line.r_squared == seg.regions[i].line.r_squared);
    CHECK(back.regions[i].line.n == seg.regions[i].line.n);
  }
  CHECK(back.flags == seg.flags);
}
