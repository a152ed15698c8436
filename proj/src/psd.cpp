#include "membrane/psd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "membrane/types.hpp"

namespace membrane {
namespace {

constexpr double kFar = 1e20;  // effectively infinite squared distance

/// 1D squared-distance transform (lower envelope of parabolas), the
/// row/column pass of the exact 2D Euclidean transform.
void edt_1d(const std::vector<double>& f, std::vector<double>& d,
            std::vector<int>& v, std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
      if (s > z[k]) {
        break;
      }
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) {
      ++k;
    }
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

void PoreMask::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("mask dimensions must be positive");
  }
  if (bits.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("mask raster size does not match dimensions");
  }
  if (!(scale_nm_per_px > 0)) {
    throw std::invalid_argument("mask scale must be positive");
  }
  if (std::find(bits.begin(), bits.end(), std::uint8_t{0}) == bits.end()) {
    throw std::invalid_argument("mask has no background pixels");
  }
}

std::vector<PoreRecord> label_pores(const PoreMask& mask) {
  mask.validate();
  const int w = mask.width, h = mask.height;
  std::vector<std::uint8_t> seen(mask.bits.size(), 0);
  std::vector<PoreRecord> pores;
  std::vector<std::pair<int, int>> stack;

  for (int y0 = 0; y0 < h; ++y0) {
    for (int x0 = 0; x0 < w; ++x0) {
      const std::size_t i0 = static_cast<std::size_t>(y0) * w + x0;
      if (mask.bits[i0] == 0 || seen[i0]) {
        continue;
      }
      PoreRecord pore;
      pore.id = static_cast<int>(pores.size()) + 1;
      seen[i0] = 1;
      stack.clear();
      stack.emplace_back(x0, y0);
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++pore.area_px;
        if (x == 0 || y == 0 || x == w - 1 || y == h - 1) {
          pore.touches_border = true;
        }
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) {
              continue;
            }
            const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
            if (mask.bits[ni] != 0 && !seen[ni]) {
              seen[ni] = 1;
              stack.emplace_back(nx, ny);
            }
          }
        }
      }
      pores.push_back(pore);
    }
  }
  return pores;
}

double equivalent_diameter(double area_nm2) {
  if (!(area_nm2 > 0)) {
    throw std::invalid_argument("pore area must be positive, got " +
                                std::to_string(area_nm2));
  }
  return 2.0 * std::sqrt(area_nm2 / kPi);
}

std::vector<double> squared_distance_to_pores(const PoreMask& mask) {
  mask.validate();
  const int w = mask.width, h = mask.height;
  std::vector<double> dist(mask.bits.size());
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    dist[i] = mask.bits[i] != 0 ? 0.0 : kFar;
  }
  const int m = std::max(w, h);
  std::vector<double> f(static_cast<std::size_t>(m)), d(static_cast<std::size_t>(m));
  std::vector<int> v(static_cast<std::size_t>(m));
  std::vector<double> z(static_cast<std::size_t>(m) + 1);

  for (int x = 0; x < w; ++x) {
    f.resize(static_cast<std::size_t>(h));
    d.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
      f[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(y) * w + x];
    }
    edt_1d(f, d, v, z);
    for (int y = 0; y < h; ++y) {
      dist[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(y)];
    }
  }
  for (int y = 0; y < h; ++y) {
    f.resize(static_cast<std::size_t>(w));
    d.resize(static_cast<std::size_t>(w));
    for (int x = 0; x < w; ++x) {
      f[static_cast<std::size_t>(x)] = dist[static_cast<std::size_t>(y) * w + x];
    }
    edt_1d(f, d, v, z);
    for (int x = 0; x < w; ++x) {
      dist[static_cast<std::size_t>(y) * w + x] = d[static_cast<std::size_t>(x)];
    }
  }
  return dist;
}

PoreMask dilate_mask(const PoreMask& mask, double t_nm) {
  if (t_nm < 0) {
    throw std::invalid_argument("dilation must be non-negative, got " +
                                std::to_string(t_nm));
  }
  PoreMask out = mask;
  out.corrected = true;
  if (t_nm == 0) {
    return out;
  }
  const double r = t_nm / mask.scale_nm_per_px;
  const double r2 = r * r * (1.0 + 1e-12) + 1e-12;  // closed ball, fp-safe
  const std::vector<double> dist = squared_distance_to_pores(mask);
  for (std::size_t i = 0; i < out.bits.size(); ++i) {
    if (dist[i] <= r2) {
      out.bits[i] = 1;
    }
  }
  return out;
}

PoreSizeDistribution area_weighted_psd(const PoreMask& mask, const PsdConfig& cfg) {
  if (!(cfg.bin_width_nm > 0)) {
    throw std::invalid_argument("bin width must be positive");
  }
  if (cfg.dilation_nm > 0) {
    PsdConfig undilated = cfg;
    undilated.dilation_nm = 0;
    return area_weighted_psd(dilate_mask(mask, cfg.dilation_nm), undilated);
  }
  const std::vector<PoreRecord> pores = label_pores(mask);
  const double scale2 = mask.scale_nm_per_px * mask.scale_nm_per_px;
  const double image_area_nm2 =
      scale2 * static_cast<double>(mask.width) * static_cast<double>(mask.height);

  PoreSizeDistribution psd;
  psd.bin_width_nm = cfg.bin_width_nm;
  psd.corrected = mask.corrected;
  psd.replicate_id = mask.replicate_id;

  std::int64_t pore_px = 0;
  for (const PoreRecord& p : pores) {
    if (p.touches_border) {
      ++psd.border_pore_count;
      if (!cfg.include_border_pores) {
        continue;
      }
    }
    ++psd.pore_count;
    pore_px += p.area_px;
    const double area_nm2 = static_cast<double>(p.area_px) * scale2;
    const double d = equivalent_diameter(area_nm2);
    const std::size_t bin = static_cast<std::size_t>(d / cfg.bin_width_nm);
    if (psd.area_fraction.size() <= bin) {
      psd.area_fraction.resize(bin + 1, 0.0);
    }
    psd.area_fraction[bin] += area_nm2 / image_area_nm2;
  }
  psd.surface_porosity_pct = 100.0 * static_cast<double>(pore_px) /
                             (static_cast<double>(mask.width) *
                              static_cast<double>(mask.height));
  return psd;
}

AggregatedPsd aggregate_replicates(const std::vector<PoreSizeDistribution>& psds) {
  if (psds.size() < 2) {
    throw std::invalid_argument("need at least 2 replicates, got " +
                                std::to_string(psds.size()));
  }
  const double width = psds.front().bin_width_nm;
  std::size_t bins = 0;
  for (const PoreSizeDistribution& p : psds) {
    if (std::abs(p.bin_width_nm - width) > 1e-12) {
      throw std::runtime_error("mismatched bin edges: " +
                               std::to_string(p.bin_width_nm) + " nm vs " +
                               std::to_string(width) + " nm pitch");
    }
    bins = std::max(bins, p.area_fraction.size());
  }

  AggregatedPsd agg;
  agg.bin_width_nm = width;
  agg.n = static_cast<int>(psds.size());
  agg.mean_area_fraction.assign(bins, 0.0);
  agg.se_area_fraction.assign(bins, 0.0);
  const double n = static_cast<double>(psds.size());
  for (std::size_t b = 0; b < bins; ++b) {
    double mean = 0;
    for (const PoreSizeDistribution& p : psds) {
      mean += b < p.area_fraction.size() ? p.area_fraction[b] : 0.0;
    }
    mean /= n;
    double ss = 0;
    for (const PoreSizeDistribution& p : psds) {
      const double v = b < p.area_fraction.size() ? p.area_fraction[b] : 0.0;
      ss += (v - mean) * (v - mean);
    }
    agg.mean_area_fraction[b] = mean;
    agg.se_area_fraction[b] = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  double pmean = 0;
  for (const PoreSizeDistribution& p : psds) {
    pmean += p.surface_porosity_pct;
  }
  pmean /= n;
  double pss = 0;
  for (const PoreSizeDistribution& p : psds) {
    pss += (p.surface_porosity_pct - pmean) * (p.surface_porosity_pct - pmean);
  }
  agg.porosity_mean_pct = pmean;
  agg.porosity_se_pct = std::sqrt(pss / (n - 1.0)) / std::sqrt(n);
  return agg;
}

}  // namespace membrane
