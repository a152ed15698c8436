#include <doctest.h>

#include <cmath>

#include "membrane/ingest.hpp"
#include "membrane/props.hpp"
#include "membrane/synth.hpp"

using namespace membrane;

namespace {

RegionFit make_region(RegionLabel label, double begin, double end, double slope,
                      double intercept) {
  RegionFit r;
  r.label = label;
  r.strain_begin = begin;
  r.strain_end = end;
  r.line.slope = slope;
  r.line.intercept = intercept;
  r.line.r_squared = 1.0;
  r.line.n = 50;
  return r;
}

/// Three-region result with elastic s=200e, plateau and densification as given.
SegmentationResult make_seg(double plateau_slope, double plateau_icept,
                            double dens_slope, double dens_icept) {
  SegmentationResult seg;
  seg.sample_id = "mock";
  seg.breakpoints = {0.10, 0.60};
  seg.regions.push_back(make_region(RegionLabel::elastic, 0.0, 0.10, 200.0, 0.0));
  seg.regions.push_back(
      make_region(RegionLabel::plateau, 0.10, 0.60, plateau_slope, plateau_icept));
  seg.regions.push_back(
      make_region(RegionLabel::densification, 0.60, 0.9, dens_slope, dens_icept));
  return seg;
}

}  // namespace

TEST_CASE("elastic modulus is the elastic fit slope") {
  SegmentationResult seg = make_seg(50, 10, 350, -170);
  seg.regions[0].line.slope = 166.1;
  CHECK(elastic_modulus(seg) == 166.1);
  seg.regions[0].line.slope = 286.0;
  CHECK(elastic_modulus(seg) == 286.0);
}

TEST_CASE("missing or non-physical elastic fit is an error") {
  SegmentationResult empty;
  empty.sample_id = "x";
  CHECK_THROWS_WITH_AS(elastic_modulus(empty), doctest::Contains("missing elastic"),
                       std::runtime_error);
  SegmentationResult flat = make_seg(50, 10, 350, -170);
  flat.regions[0].line.slope = 0.0;
  CHECK_THROWS_WITH_AS(elastic_modulus(flat), doctest::Contains("non-physical"),
                       std::runtime_error);
}

TEST_CASE("yield strength evaluates the elastic fit at the first breakpoint") {
  SegmentationResult seg = make_seg(50, 10, 350, -170);
  CHECK(yield_strength(seg) == doctest::Approx(20.0).epsilon(1e-12));
  seg.regions[0].strain_end = 0.0;
  CHECK(yield_strength(seg) == 0.0);
}

TEST_CASE("yield strength needs both bounding regions") {
  SegmentationResult seg = make_seg(50, 10, 350, -170);
  seg.regions.erase(seg.regions.begin() + 1);  // drop plateau
  CHECK_THROWS_WITH_AS(yield_strength(seg), doctest::Contains("missing"),
                       std::runtime_error);
}

TEST_CASE("yield strength agrees between elastic and plateau fits of a continuous model") {
  const SyntheticCurve s = generate_curve(CurveSpec{});
  const SegmentationResult seg =
      segment_curve(align_contact(to_stress_strain(s.raw, s.meta.geometry)));
  const double from_elastic = seg.regions[0].line.at(seg.breakpoints[0]);
  const double from_plateau = seg.regions[1].line.at(seg.breakpoints[0]);
  CHECK(std::abs(from_elastic - from_plateau) < 1e-9);
  CHECK(yield_strength(seg) == from_elastic);
}

TEST_CASE("pore fraction is the plateau-densification intersection") {
  // 10 + 50e = -170 + 350e  =>  e = 0.60
  const SegmentationResult seg = make_seg(50, 10, 350, -170);
  CHECK(pore_fraction(seg) == doctest::Approx(0.60).epsilon(1e-12));

  // Constructed to cross at 0.57: plateau 12 + 40e, densification crossing
  // there with slope 360: intercept = 12 + 40*0.57 - 360*0.57 = -170.4.
  const SegmentationResult second = make_seg(40, 12, 360, -170.4);
  CHECK(pore_fraction(second) == doctest::Approx(0.57).epsilon(1e-12));
}

TEST_CASE("parallel fits have no intersection") {
  const SegmentationResult seg = make_seg(50, 10, 50, 10);
  CHECK_THROWS_WITH_AS(pore_fraction(seg), doctest::Contains("degenerate intersection"),
                       std::runtime_error);
}

TEST_CASE("pore fraction above one is returned with a flag") {
  // 5 + 10e = -102 + 110e  =>  e = 1.07 + eps => pick intercept for e=1.08
  const SegmentationResult seg = make_seg(10, 5, 110, 5 + 10 * 1.08 - 110 * 1.08);
  FlagSet flags;
  CHECK(pore_fraction(seg, &flags) == doctest::Approx(1.08).epsilon(1e-9));
  CHECK(flags.count(CurveFlag::pore_fraction_gt_1) == 1);
}

TEST_CASE("pore fraction is invariant under uniform stress scaling") {
  const SegmentationResult base = make_seg(50, 10, 350, -170);
  const double ref = pore_fraction(base);
  for (double k : {2.0, 7.0}) {
    const SegmentationResult scaled =
        make_seg(50 * k, 10 * k, 350 * k, -170 * k);
    CHECK(pore_fraction(scaled) == doctest::Approx(ref).epsilon(1e-13));
  }
}

TEST_CASE("creep strain is the strain accumulated over the hold") {
  SegmentationResult seg = make_seg(50, 10, 350, -170);
  CHECK_FALSE(creep_strain(seg).has_value());

  seg.has_creep = true;
  seg.regions.push_back(make_region(RegionLabel::creep, 0.80, 0.83, 1e-4, 0.8));
  FlagSet flags;
  const auto cs = creep_strain(seg, &flags);
  REQUIRE(cs.has_value());
  CHECK(*cs == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(flags.empty());
}

TEST_CASE("zero-length creep is zero with a warning flag") {
  SegmentationResult seg = make_seg(50, 10, 350, -170);
  seg.has_creep = true;
  seg.regions.push_back(make_region(RegionLabel::creep, 0.80, 0.80, 0.0, 0.8));
  FlagSet flags;
  const auto cs = creep_strain(seg, &flags);
  REQUIRE(cs.has_value());
  CHECK(*cs == 0.0);
  CHECK(flags.count(CurveFlag::zero_creep) == 1);
}

TEST_CASE("extract_properties merges segmentation and extraction flags") {
  SegmentationResult seg = make_seg(10, 5, 110, 5 + 10 * 1.08 - 110 * 1.08);
  seg.flags.insert(CurveFlag::low_r2);
  const MechanicalProperties props = extract_properties(seg);
  CHECK(props.flags.count(CurveFlag::low_r2) == 1);
  CHECK(props.flags.count(CurveFlag::pore_fraction_gt_1) == 1);
  CHECK(props.elastic_modulus_bar == 200.0);
  CHECK(props.pore_fraction == doctest::Approx(1.08).epsilon(1e-9));
  CHECK_FALSE(props.creep_strain.has_value());
}

TEST_CASE("oracle curves reproduce ground truth at zero noise") {
  CurveSpec spec;
  spec.elastic_modulus_bar = 220.0;
  spec.yield_strain = 0.12;
  spec.densification_onset_strain = 0.64;
  const SyntheticCurve s = generate_curve(spec);
  const SegmentationResult seg =
      segment_curve(align_contact(to_stress_strain(s.raw, s.meta.geometry)));
  const MechanicalProperties props = extract_properties(seg);
  CHECK(props.elastic_modulus_bar ==
        doctest::Approx(s.truth.elastic_modulus_bar).epsilon(0.02));
  CHECK(props.yield_strength_bar ==
        doctest::Approx(s.truth.yield_stress_bar).epsilon(0.05));
  CHECK(std::abs(props.pore_fraction - s.truth.pore_fraction) < 0.01);
}

TEST_CASE("noise never removes a structural flag raised at zero noise") {
  CurveSpec spec;
  spec.elastic_modulus_bar = 200;
  spec.yield_strain = 0.55;
  spec.densification_onset_strain = 0.57;
  spec.max_strain = 0.8;

  const SyntheticCurve base = generate_curve(spec);
  const SegmentationResult clean =
      segment_curve(align_contact(to_stress_strain(base.raw, base.meta.geometry)));
  const MechanicalProperties clean_props = extract_properties(clean);
  REQUIRE(clean_props.flags.count(CurveFlag::no_plateau) == 1);

  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    CurveSpec noisy = spec;
    noisy.seed = seed;
    noisy.noise_sigma_bar = 0.005 * trilinear_stress(spec, spec.effective_max_strain());
    const SyntheticCurve s = generate_curve(noisy);
    const MechanicalProperties props = extract_properties(
        segment_curve(align_contact(to_stress_strain(s.raw, s.meta.geometry))));
    for (CurveFlag f : clean_props.flags) {
      CHECK(props.flags.count(f) == 1);
    }
  }
}
