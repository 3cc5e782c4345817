#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "afc/csv.hpp"

namespace afc {

struct FrequencyGrid {
  double span_hz = 200e6;
  std::size_t n_points = 1u << 15;
  double center_offset_hz = 0.0;

  double resolution() const { return span_hz / static_cast<double>(n_points); }
  double time_step() const { return 1.0 / span_hz; }
  double record_length() const { return 1.0 / resolution(); }
  double frequency(std::size_t k) const {
    return center_offset_hz + (static_cast<double>(k) - static_cast<double>(n_points / 2)) * resolution();
  }
  // outer edges of the first and last bin
  double low_edge() const { return frequency(0) - 0.5 * resolution(); }
  double high_edge() const { return frequency(n_points - 1) + 0.5 * resolution(); }
  bool contains(double lo, double hi) const { return lo >= low_edge() && hi <= high_edge(); }
};

inline constexpr double max_echo_resolution_hz = 20e3;

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline FrequencyGrid build_grid(double span_hz, std::size_t n_points, double center_offset_hz = 0.0) {
  if (!(span_hz > 0.0)) throw std::invalid_argument("grid span must be positive");
  if (!is_power_of_two(n_points)) throw std::invalid_argument("grid n_points must be a power of two");
  if (n_points < 4096) throw std::invalid_argument("grid n_points must be at least 4096");
  return FrequencyGrid{span_hz, n_points, center_offset_hz};
}

inline void require_echo_resolution(const FrequencyGrid& g) {
  if (g.resolution() > max_echo_resolution_hz) {
    std::ostringstream os;
    os << "grid resolution " << g.resolution() << " Hz exceeds " << max_echo_resolution_hz
       << " Hz; increase n_points or reduce span for echo simulation";
    throw std::invalid_argument(os.str());
  }
}

enum class FeatureKind { pit, antihole, background };

inline const char* to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::pit: return "pit";
    case FeatureKind::antihole: return "antihole";
    case FeatureKind::background: return "background";
  }
  return "?";
}

inline FeatureKind feature_kind_from(const std::string& s) {
  if (s == "pit") return FeatureKind::pit;
  if (s == "antihole") return FeatureKind::antihole;
  if (s == "background") return FeatureKind::background;
  throw std::invalid_argument("unknown feature kind '" + s + "'");
}

struct SpectralFeature {
  FeatureKind kind = FeatureKind::pit;
  double low_hz = 0.0;
  double high_hz = 0.0;
  double depth = 0.0;  // the level the feature sets inside its range
};

enum class ToothShape { gaussian, square, lorentzian };

inline const char* to_string(ToothShape s) {
  switch (s) {
    case ToothShape::gaussian: return "gaussian";
    case ToothShape::square: return "square";
    case ToothShape::lorentzian: return "lorentzian";
  }
  return "?";
}

inline ToothShape tooth_shape_from(const std::string& s) {
  if (s == "gaussian") return ToothShape::gaussian;
  if (s == "square") return ToothShape::square;
  if (s == "lorentzian") return ToothShape::lorentzian;
  throw std::invalid_argument("unknown tooth shape '" + s + "'");
}

// Mean of one tooth over a period, in units of peak * width / spacing.
inline double tooth_area_factor(ToothShape s) {
  switch (s) {
    case ToothShape::gaussian: return std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));
    case ToothShape::square: return 1.0;
    case ToothShape::lorentzian: return std::numbers::pi / 2.0;
  }
  return 1.0;
}

struct CombSpec {
  double spacing_hz = 1e6;
  double finesse = 12.0;
  double bandwidth_hz = 6e6;
  double peak_depth = 2.6;
  ToothShape shape = ToothShape::gaussian;
  double floor_depth = 0.0;

  double tooth_width() const { return spacing_hz / finesse; }
  int n_teeth() const { return static_cast<int>(std::floor(bandwidth_hz / spacing_hz + 1e-9)) + 1; }
  double tooth_center(int j, double center_hz) const {
    return center_hz + (j - 0.5 * (n_teeth() - 1)) * spacing_hz;
  }
  // period average ignoring overlap between neighbouring teeth
  double period_average() const {
    return floor_depth + (peak_depth - floor_depth) * tooth_area_factor(shape) / finesse;
  }
};

inline void check(const CombSpec& c) {
  if (!(c.spacing_hz > 0.0)) throw std::invalid_argument("comb spacing must be positive");
  if (!(c.finesse > 1.0)) throw std::invalid_argument("comb finesse must exceed 1");
  if (c.bandwidth_hz < c.spacing_hz) throw std::invalid_argument("comb bandwidth must be at least one spacing");
  if (!(c.floor_depth >= 0.0) || c.peak_depth < c.floor_depth)
    throw std::invalid_argument("comb requires peak_depth >= floor_depth >= 0");
}

struct AbsorptionProfile {
  FrequencyGrid grid;
  std::vector<double> depth;
};

struct ProfileResult {
  AbsorptionProfile profile;
  std::vector<std::string> warnings;
};

namespace detail {

inline double overlap(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

// Average of a unit-peak tooth centred at c over the bin [a, b].
inline double tooth_bin_average(ToothShape s, double width, double c, double a, double b) {
  switch (s) {
    case ToothShape::gaussian: {
      const double sigma = width / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
      const double k = 1.0 / (sigma * std::numbers::sqrt2);
      return sigma * std::sqrt(std::numbers::pi / 2.0) * (std::erf((b - c) * k) - std::erf((a - c) * k)) / (b - a);
    }
    case ToothShape::square:
      return overlap(a, b, c - 0.5 * width, c + 0.5 * width) / (b - a);
    case ToothShape::lorentzian: {
      const double g = 0.5 * width;
      return g * (std::atan((b - c) / g) - std::atan((a - c) / g)) / (b - a);
    }
  }
  return 0.0;
}

// Bins further than this from a tooth centre get no contribution from it.
inline double tooth_reach(ToothShape s, double width, double span) {
  return s == ToothShape::lorentzian ? span : 20.0 * width;
}

inline void add_teeth(std::vector<double>& depth, const FrequencyGrid& g, const CombSpec& c, double center_hz,
                      int first, int last) {
  const double df = g.resolution(), w = c.tooth_width(), amp = c.peak_depth - c.floor_depth;
  const double reach = tooth_reach(c.shape, w, g.span_hz);
  for (int j = first; j <= last; ++j) {
    const double nu = c.tooth_center(j, center_hz);
    const double f0 = g.frequency(0);
    const auto k0 = static_cast<std::ptrdiff_t>(std::floor((nu - reach - f0) / df));
    const auto k1 = static_cast<std::ptrdiff_t>(std::ceil((nu + reach - f0) / df));
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, k0);
         k <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(g.n_points) - 1, k1); ++k) {
      const double f = g.frequency(static_cast<std::size_t>(k));
      depth[static_cast<std::size_t>(k)] += amp * tooth_bin_average(c.shape, w, nu, f - 0.5 * df, f + 0.5 * df);
    }
  }
}

inline void require_teeth_on_grid(const FrequencyGrid& g, const CombSpec& c, double center_hz) {
  const double lo = c.tooth_center(0, center_hz) - c.tooth_width();
  const double hi = c.tooth_center(c.n_teeth() - 1, center_hz) + c.tooth_width();
  if (!g.contains(lo, hi)) throw std::invalid_argument("comb teeth extend beyond the frequency grid");
}

}  // namespace detail

inline AbsorptionProfile flat_profile(const FrequencyGrid& g, double depth) {
  return AbsorptionProfile{g, std::vector<double>(g.n_points, depth)};
}

/// Features are applied in order, each overwriting the bins whose centres fall in its range.
inline ProfileResult synthesize_profile(const std::vector<SpectralFeature>& features, double base_depth,
                                        const FrequencyGrid& g) {
  if (!(base_depth >= 0.0)) throw std::invalid_argument("base depth must be non-negative");
  ProfileResult out{flat_profile(g, base_depth), {}};
  std::vector<int> owner(g.n_points, -1);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    if (!(f.depth >= 0.0)) throw std::invalid_argument("feature depth must be non-negative");
    if (!(f.high_hz > f.low_hz)) throw std::invalid_argument("feature range must be nonempty");
    if (!g.contains(f.low_hz, f.high_hz)) throw std::invalid_argument("feature range lies outside the grid");
    std::optional<int> clash;
    for (std::size_t k = 0; k < g.n_points; ++k) {
      const double nu = g.frequency(k);
      if (nu < f.low_hz || nu > f.high_hz) continue;
      if (owner[k] >= 0 && out.profile.depth[k] != f.depth && !clash) clash = owner[k];
      out.profile.depth[k] = f.depth;
      owner[k] = static_cast<int>(i);
    }
    if (clash) {
      std::ostringstream os;
      os << "feature " << i << " (" << to_string(f.kind) << ") overrides feature " << *clash
         << " with a different depth";
      out.warnings.push_back(os.str());
    }
  }
  return out;
}

inline AbsorptionProfile comb_profile(const CombSpec& c, const FrequencyGrid& g) {
  check(c);
  detail::require_teeth_on_grid(g, c, g.center_offset_hz);
  auto p = flat_profile(g, c.floor_depth);
  detail::add_teeth(p.depth, g, c, g.center_offset_hz, 0, c.n_teeth() - 1);
  return p;
}

/// Comb band left at peak depth except the central `carved` tooth cells, which hold teeth.
inline AbsorptionProfile truncated_comb_profile(const CombSpec& c, const FrequencyGrid& g, int carved) {
  check(c);
  const int n = c.n_teeth();
  if (carved < 1 || carved > n || (n - carved) % 2 != 0)
    throw std::invalid_argument("carved tooth count must be in [1, n_teeth] with the same parity");
  detail::require_teeth_on_grid(g, c, g.center_offset_hz);
  auto p = flat_profile(g, c.floor_depth);
  const int first = (n - carved) / 2, last = first + carved - 1;
  const double c0 = g.center_offset_hz;
  const double band_lo = c0 - 0.5 * c.bandwidth_hz, band_hi = c0 + 0.5 * c.bandwidth_hz;
  const double cell_lo = c.tooth_center(first, c0) - 0.5 * c.spacing_hz;
  const double cell_hi = c.tooth_center(last, c0) + 0.5 * c.spacing_hz;
  const double df = g.resolution();
  for (std::size_t k = 0; k < g.n_points; ++k) {
    const double a = g.frequency(k) - 0.5 * df, b = a + df;
    const double flat = detail::overlap(a, b, band_lo, cell_lo) + detail::overlap(a, b, cell_hi, band_hi);
    p.depth[k] += (c.peak_depth - c.floor_depth) * flat / df;
  }
  detail::add_teeth(p.depth, g, c, c0, first, last);
  return p;
}

inline ProfileResult double_comb(const CombSpec& a, const CombSpec& b, double detuning_hz, const FrequencyGrid& g,
                                 double ceiling = std::numeric_limits<double>::infinity()) {
  check(a);
  check(b);
  detail::require_teeth_on_grid(g, a, g.center_offset_hz);
  detail::require_teeth_on_grid(g, b, g.center_offset_hz + detuning_hz);
  ProfileResult out{comb_profile(a, g), {}};
  auto& d = out.profile.depth;
  for (auto& v : d) v += b.floor_depth;
  detail::add_teeth(d, g, b, g.center_offset_hz + detuning_hz, 0, b.n_teeth() - 1);
  std::size_t clipped = 0;
  for (auto& v : d)
    if (v > ceiling) {
      v = ceiling;
      ++clipped;
    }
  if (clipped) {
    std::ostringstream os;
    os << clipped << " bins clipped at depth ceiling " << ceiling;
    out.warnings.push_back(os.str());
  }
  return out;
}

inline AbsorptionProfile add_profiles(const AbsorptionProfile& a, const AbsorptionProfile& b) {
  if (a.depth.size() != b.depth.size() || a.grid.span_hz != b.grid.span_hz ||
      a.grid.center_offset_hz != b.grid.center_offset_hz)
    throw std::invalid_argument("profiles live on different grids");
  auto out = a;
  for (std::size_t k = 0; k < out.depth.size(); ++k) out.depth[k] += b.depth[k];
  return out;
}

/// Bin-overlap weighted mean of the depth over [lo, hi].
inline double effective_depth(const AbsorptionProfile& p, double lo, double hi) {
  const auto& g = p.grid;
  if (!(hi > lo)) throw std::invalid_argument("band must be nonempty");
  if (!g.contains(lo, hi)) throw std::invalid_argument("band lies outside the grid");
  const double df = g.resolution();
  double acc = 0.0;
  const auto k0 = static_cast<std::size_t>(std::max(0.0, std::floor((lo - g.low_edge()) / df)));
  const auto k1 = std::min(g.n_points - 1, static_cast<std::size_t>(std::ceil((hi - g.low_edge()) / df)));
  for (std::size_t k = k0; k <= k1; ++k) {
    const double a = g.frequency(k) - 0.5 * df;
    acc += p.depth[k] * detail::overlap(a, a + df, lo, hi);
  }
  return acc / (hi - lo);
}

inline double integrated_depth(const AbsorptionProfile& p) {
  double s = 0.0;
  for (double v : p.depth) s += v;
  return s * p.grid.resolution();
}

/// Integral-conserving resampling; regions outside the source grid take its edge values.
inline AbsorptionProfile resample(const AbsorptionProfile& p, const FrequencyGrid& target) {
  const auto& g = p.grid;
  const double df = g.resolution(), e0 = g.low_edge();
  const std::size_t n = g.n_points;
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + p.depth[k] * df;
  auto C = [&](double x) {
    if (x <= e0) return (x - e0) * p.depth.front();
    const double u = (x - e0) / df;
    if (u >= static_cast<double>(n)) return cum[n] + (x - g.high_edge()) * p.depth.back();
    const auto k = static_cast<std::size_t>(u);
    return cum[k] + (u - static_cast<double>(k)) * p.depth[k] * df;
  };
  AbsorptionProfile out{target, std::vector<double>(target.n_points)};
  const double dt = target.resolution();
  for (std::size_t k = 0; k < target.n_points; ++k) {
    const double a = target.frequency(k) - 0.5 * dt;
    out.depth[k] = std::max(0.0, (C(a + dt) - C(a)) / dt);
  }
  return out;
}

inline void write_csv(std::ostream& os, const AbsorptionProfile& p) {
  os << "freq_hz,depth\n";
  for (std::size_t k = 0; k < p.depth.size(); ++k) csv::row(os, p.grid.frequency(k), p.depth[k]);
}

}  // namespace afc
