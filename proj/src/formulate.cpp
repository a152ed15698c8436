#include "membrane/formulate.hpp"

#include <cmath>
#include <stdexcept>

namespace membrane {

void Stock::validate() const {
  if (label.empty()) {
    throw std::invalid_argument("stock label must not be empty");
  }
  if (!(concentration_wt_pct >= 0 && concentration_wt_pct < 100)) {
    throw std::invalid_argument("stock " + label +
                                ": concentration must be in [0, 100) wt%");
  }
  if (!(density_g_ml > 0)) {
    throw std::invalid_argument("stock " + label + ": density must be positive");
  }
}

double viscosity_ratio(double c_a_wt_pct, double c_b_wt_pct,
                       const FormulateConfig& cfg) {
  const double d = cfg.viscosity_log10_beta * std::abs(c_a_wt_pct - c_b_wt_pct);
  return std::pow(10.0, d);
}

DilutionPlan plan_dilution(const Stock& a, const Stock& b, double target_wt_pct,
                           double total_mass_g, const FormulateConfig& cfg) {
  a.validate();
  b.validate();
  if (!(total_mass_g > 0)) {
    throw std::invalid_argument("total mass must be positive, got " +
                                std::to_string(total_mass_g));
  }
  const double ca = a.concentration_wt_pct;
  const double cb = b.concentration_wt_pct;
  const double lo = std::min(ca, cb);
  const double hi = std::max(ca, cb);
  if (!(target_wt_pct >= lo && target_wt_pct <= hi)) {
    throw std::invalid_argument(
        "target " + std::to_string(target_wt_pct) + " wt% outside [" +
        std::to_string(lo) + ", " + std::to_string(hi) + "] spanned by " +
        a.label + " and " + b.label);
  }

  double mass_a;
  if (ca == cb) {
    // Both stocks at the target (the range check above guarantees it).
    mass_a = total_mass_g;
  } else {
    // Lever rule: m_a*(c_a - t) + m_b*(c_b - t) = 0, m_a + m_b = total.
    mass_a = total_mass_g * (target_wt_pct - cb) / (ca - cb);
  }
  const double mass_b = total_mass_g - mass_a;

  DilutionPlan plan;
  plan.target_wt_pct = target_wt_pct;
  plan.total_mass_g = total_mass_g;
  plan.components.push_back({a.label, mass_a, mass_a / a.density_g_ml});
  plan.components.push_back({b.label, mass_b, mass_b / b.density_g_ml});
  plan.viscosity_ratio = viscosity_ratio(ca, cb, cfg);
  if (plan.viscosity_ratio > cfg.viscosity_warn_ratio) {
    plan.warning = "viscosity ratio " + std::to_string(plan.viscosity_ratio) +
                   " between " + a.label + " and " + b.label + " exceeds " +
                   std::to_string(cfg.viscosity_warn_ratio) +
                   "; expect slow homogenization";
  }
  return plan;
}

SeriesPlan plan_series(const Stock& stock, const Stock& diluent,
                       const std::vector<double>& targets_wt_pct,
                       double per_target_mass_g, const FormulateConfig& cfg) {
  SeriesPlan series;
  for (double target : targets_wt_pct) {
    try {
      series.plans.push_back(
          plan_dilution(stock, diluent, target, per_target_mass_g, cfg));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("series target " + std::to_string(target) +
                                  " wt% infeasible: " + e.what());
    }
  }
  for (const DilutionPlan& plan : series.plans) {
    for (const PlanComponent& c : plan.components) {
      series.total_mass_g[c.label] += c.mass_g;
    }
  }
  return series;
}

}  // namespace membrane
