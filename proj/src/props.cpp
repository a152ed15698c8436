#include "membrane/props.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {
namespace {

const RegionFit& require_region(const SegmentationResult& seg, RegionLabel label) {
  const RegionFit* r = seg.region(label);
  if (r == nullptr) {
    throw std::runtime_error("missing " + to_string(label) + " region (" +
                             seg.sample_id + ")");
  }
  return *r;
}

}  // namespace

double elastic_modulus(const SegmentationResult& seg) {
  const RegionFit& elastic = require_region(seg, RegionLabel::elastic);
  if (!(elastic.line.slope > 0)) {
    throw std::runtime_error("non-physical elastic modulus " +
                             std::to_string(elastic.line.slope) + " bar (" +
                             seg.sample_id + ")");
  }
  return elastic.line.slope;
}

double yield_strength(const SegmentationResult& seg) {
  const RegionFit& elastic = require_region(seg, RegionLabel::elastic);
  require_region(seg, RegionLabel::plateau);
  return elastic.line.at(elastic.strain_end);
}

double pore_fraction(const SegmentationResult& seg, FlagSet* flags) {
  const RegionFit& plateau = require_region(seg, RegionLabel::plateau);
  const RegionFit& dens = require_region(seg, RegionLabel::densification);
  const double dslope = dens.line.slope - plateau.line.slope;
  if (std::abs(dslope) < 1e-9) {
    throw std::runtime_error(
        "degenerate intersection: plateau and densification fits are parallel (" +
        seg.sample_id + ")");
  }
  const double eps = (plateau.line.intercept - dens.line.intercept) / dslope;
  if (eps > 1.0 && flags != nullptr) {
    flags->insert(CurveFlag::pore_fraction_gt_1);
  }
  return eps;
}

std::optional<double> creep_strain(const SegmentationResult& seg, FlagSet* flags) {
  const RegionFit* creep = seg.region(RegionLabel::creep);
  if (creep == nullptr) {
    return std::nullopt;
  }
  const double accumulated = creep->strain_end - creep->strain_begin;
  if (accumulated < 1e-12) {
    if (flags != nullptr) {
      flags->insert(CurveFlag::zero_creep);
    }
    return 0.0;
  }
  return accumulated;
}

MechanicalProperties extract_properties(const SegmentationResult& seg) {
  MechanicalProperties props;
  props.flags = seg.flags;
  props.elastic_modulus_bar = elastic_modulus(seg);
  props.yield_strength_bar = yield_strength(seg);
  props.pore_fraction = pore_fraction(seg, &props.flags);
  props.creep_strain = creep_strain(seg, &props.flags);
  return props;
}

}  // namespace membrane
