#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "membrane/config.hpp"

namespace membrane {

/// One stock solution on the deck. Viscosity comes from the log-linear model
/// in FormulateConfig; density converts planned masses to pipetted volumes.
struct Stock {
  std::string label;
  double concentration_wt_pct = 0;
  double density_g_ml = 1.0;

  void validate() const;
};

struct PlanComponent {
  std::string label;
  double mass_g = 0;
  double volume_ml = 0;
};

struct DilutionPlan {
  std::vector<PlanComponent> components;
  double target_wt_pct = 0;
  double total_mass_g = 0;
  double viscosity_ratio = 1.0;
  std::optional<std::string> warning;
};

/// Predicted viscosity ratio (>= 1) between two concentrations under the
/// log10(eta) = alpha + beta * c model.
double viscosity_ratio(double c_a_wt_pct, double c_b_wt_pct,
                       const FormulateConfig& cfg = {});

/// Lever-rule split of total_mass between two stocks to hit the target
/// concentration. Throws when the target lies outside the stocks' range or
/// both stocks share a concentration different from the target.
DilutionPlan plan_dilution(const Stock& a, const Stock& b, double target_wt_pct,
                           double total_mass_g, const FormulateConfig& cfg = {});

struct SeriesPlan {
  std::vector<DilutionPlan> plans;
  std::map<std::string, double> total_mass_g;  ///< per stock label
};

/// One plan per target, plus aggregate stock consumption. Any infeasible
/// target aborts the series, naming the offender.
SeriesPlan plan_series(const Stock& stock, const Stock& diluent,
                       const std::vector<double>& targets_wt_pct,
                       double per_target_mass_g, const FormulateConfig& cfg = {});

}  // namespace membrane
