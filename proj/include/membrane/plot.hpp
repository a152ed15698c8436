#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "membrane/segment.hpp"
#include "membrane/types.hpp"

namespace membrane {

/// One group of points on a scatter panel, with an optional fitted line.
struct TrendSeries {
  std::string label;
  std::string color;  ///< CSS color, e.g. "#1f77b4"
  std::vector<std::pair<double, double>> points;
  bool has_line = false;
  double slope = 0;
  double intercept = 0;
};

/// Standard colors for the three humidity groups.
const char* group_color(const std::string& group);

/// Two stacked scatter panels (modulus and pore fraction versus wt%), with
/// per-group trend lines and a legend. Byte-deterministic for fixed input.
void write_overview_svg(const std::filesystem::path& path,
                        const std::vector<TrendSeries>& modulus_series,
                        const std::vector<TrendSeries>& pore_series);

/// One curve with its fitted region bands shaded (three bands, four with
/// creep) and region fit lines overlaid.
void write_curve_svg(const std::filesystem::path& path,
                     const StressStrainCurve& curve,
                     const SegmentationResult& seg);

}  // namespace membrane
