#pragma once

#include <algorithm>
#include <exception>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "afc/csv.hpp"
#include "afc/memory.hpp"
#include "afc/response.hpp"
#include "afc/spectral.hpp"

namespace afc {

struct MatchResult {
  double matched_depth = 0.0;
  double epsilon = 0.0;
  double loss_ratio = 0.0;  // epsilon / (4 d~*)
  double implied_finesse = std::numeric_limits<double>::quiet_NaN();
  double predicted_efficiency = std::numeric_limits<double>::quiet_NaN();
};

/// Effective depth that nulls the on-resonance reflection: R1 = R2' exp(-2 d~).
inline MatchResult matched_depth(const CavityParams& c, std::optional<double> peak_depth = std::nullopt,
                                 ToothShape shape = ToothShape::gaussian, double eta_m = 1.0) {
  check(c);
  const double r2p = c.r2_effective();
  if (c.r1 > r2p) {
    std::ostringstream os;
    os << "no positive matched depth: R1 = " << c.r1 << " exceeds R2' = " << r2p;
    throw std::invalid_argument(os.str());
  }
  MatchResult m;
  m.matched_depth = c.r1 == r2p ? 0.0 : -0.5 * std::log(c.r1 / r2p);
  m.epsilon = c.round_trip_loss();
  m.loss_ratio = m.matched_depth > 0.0 ? m.epsilon / (4.0 * m.matched_depth)
                                       : (m.epsilon == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  if (peak_depth && m.matched_depth > 0.0) {
    m.implied_finesse = *peak_depth * tooth_area_factor(shape) / m.matched_depth;
    m.predicted_efficiency = analytic_efficiency_from_ratio(eta_m, m.implied_finesse, m.loss_ratio).efficiency;
  }
  return m;
}

/// Everything needed for a single-pulse, first-echo storage run.
struct StorageSetup {
  FrequencyGrid grid;
  double base_depth = 0.97;
  std::vector<SpectralFeature> features;
  CombSpec comb;
  CavityParams cavity;
  double eta_m = 1.0;
  double pulse_fwhm_s = 0.45e-6;
  double pulse_center_s = 10e-6;
};

inline AbsorptionProfile storage_profile(const StorageSetup& s) {
  const auto base = synthesize_profile(s.features, s.base_depth, s.grid).profile;
  return add_profiles(base, comb_profile(s.comb, s.grid));
}

inline PulseTrain single_pulse(const StorageSetup& s) { return PulseTrain{{{s.pulse_center_s, s.pulse_fwhm_s, 1.0}}, 0.0}; }

inline double storage_efficiency(const StorageSetup& s) {
  const auto train = single_pulse(s);
  return simulate_storage(storage_profile(s), s.cavity, train, s.eta_m, echo_windows(train, s.comb.spacing_hz))
      .efficiencies.front();
}

struct CombOptimum {
  double closed_form_finesse = 0.0;
  double finesse = 0.0;
  double predicted_efficiency = 0.0;
  double simulated_efficiency = std::numeric_limits<double>::quiet_NaN();
  bool boundary = false;  // no comb contrast left at the matched depth
  int evaluations = 0;
};

/// Finesse from the matched-depth condition, then golden-section refinement within +-30% against the simulator.
inline CombOptimum optimize_comb(const StorageSetup& setup) {
  const auto match = matched_depth(setup.cavity);
  const auto& c = setup.comb;
  const double amp = c.peak_depth - c.floor_depth, target = match.matched_depth - c.floor_depth;
  const double reach = c.floor_depth + amp * tooth_area_factor(c.shape);
  if (!(target > 0.0) || amp * tooth_area_factor(c.shape) < target * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "peak depth " << c.peak_depth << " cannot reach the matched depth " << match.matched_depth
       << " at finesse >= 1 (maximum reachable effective depth " << reach << ")";
    throw std::invalid_argument(os.str());
  }
  CombOptimum out;
  out.closed_form_finesse = amp * tooth_area_factor(c.shape) / target;
  if (out.closed_form_finesse <= 1.0 + 1e-9) {
    out.finesse = 1.0;
    out.boundary = true;
    out.predicted_efficiency = analytic_efficiency_from_ratio(setup.eta_m, 1.0, match.loss_ratio).efficiency;
    return out;
  }
  auto eval = [&](double f) {
    auto s = setup;
    s.comb.finesse = f;
    ++out.evaluations;
    return storage_efficiency(s);
  };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::max(1.0 + 1e-6, 0.7 * out.closed_form_finesse), b = 1.3 * out.closed_form_finesse;
  double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  while (b - a > 0.02) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = eval(x2);
    }
  }
  out.finesse = f1 >= f2 ? x1 : x2;
  out.simulated_efficiency = std::max(f1, f2);
  out.predicted_efficiency = analytic_efficiency_from_ratio(setup.eta_m, out.finesse, match.loss_ratio).efficiency;
  return out;
}

enum class BandwidthScheme { enhanced, natural_same_crystal, natural_high_absorption };

inline const char* to_string(BandwidthScheme s) {
  switch (s) {
    case BandwidthScheme::enhanced: return "enhanced";
    case BandwidthScheme::natural_same_crystal: return "natural_same_crystal";
    case BandwidthScheme::natural_high_absorption: return "natural_high_absorption";
  }
  return "?";
}

inline BandwidthScheme bandwidth_scheme_from(const std::string& s) {
  if (s == "enhanced") return BandwidthScheme::enhanced;
  if (s == "natural_same_crystal") return BandwidthScheme::natural_same_crystal;
  if (s == "natural_high_absorption") return BandwidthScheme::natural_high_absorption;
  throw std::invalid_argument("unknown bandwidth scheme '" + s + "'");
}

struct SweepSetup {
  FrequencyGrid grid;
  CavityParams cavity;
  double eta_m = 1.0;
  double spacing_hz = 1e6;
  double natural_depth = 0.97;
  double enhanced_depth = 2.6;
  double pit_width_hz = 20e6;
  ToothShape shape = ToothShape::gaussian;
  double pulse_center_s = 10e-6;
};

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<double> efficiencies;
  std::string scheme;
};

/// Gaussian pulse whose spectral FWHM is half the comb bandwidth.
inline double sweep_pulse_fwhm(double bandwidth_hz) {
  return 2.0 * std::numbers::ln2 / std::numbers::pi / (0.5 * bandwidth_hz);
}

inline StorageSetup sweep_point(BandwidthScheme scheme, double bandwidth_hz, const SweepSetup& s) {
  if (bandwidth_hz > s.pit_width_hz) {
    std::ostringstream os;
    os << "comb bandwidth " << bandwidth_hz << " Hz exceeds the pit width " << s.pit_width_hz << " Hz";
    throw std::invalid_argument(os.str());
  }
  const double dm = matched_depth(s.cavity).matched_depth;
  const double c = s.grid.center_offset_hz;
  StorageSetup st;
  st.grid = s.grid;
  st.cavity = s.cavity;
  st.eta_m = s.eta_m;
  st.pulse_center_s = s.pulse_center_s;
  st.pulse_fwhm_s = sweep_pulse_fwhm(bandwidth_hz);
  const double peak = scheme == BandwidthScheme::natural_same_crystal ? s.natural_depth : s.enhanced_depth;
  st.base_depth = scheme == BandwidthScheme::natural_high_absorption ? s.enhanced_depth : s.natural_depth;
  st.features = {{FeatureKind::pit, c - 0.5 * s.pit_width_hz, c + 0.5 * s.pit_width_hz, 0.0}};
  st.comb = CombSpec{s.spacing_hz, std::max(1.0 + 1e-6, peak * tooth_area_factor(s.shape) / dm), bandwidth_hz, peak,
                     s.shape, 0.0};
  return st;
}

/// Points run concurrently; results keep the input order.
inline SweepResult sweep_bandwidth(BandwidthScheme scheme, const std::vector<double>& bandwidths_hz, const SweepSetup& s,
                                   unsigned threads = 0) {
  SweepResult out{"bandwidth_hz", bandwidths_hz, std::vector<double>(bandwidths_hz.size()), to_string(scheme)};
  std::vector<StorageSetup> points;
  for (double bw : bandwidths_hz) points.push_back(sweep_point(scheme, bw, s));
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));
  std::vector<std::exception_ptr> errors(points.size());
  auto work = [&](unsigned id) {
    for (std::size_t i = id; i < points.size(); i += threads) try {
        out.efficiencies[i] = storage_efficiency(points[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
  };
  if (threads <= 1) {
    threads = 1;
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

struct DispersionReport {
  double slope_rad_per_hz = 0.0;
  double period_swing_rad = 0.0;
  double relative_drift = 0.0;  // |slope| * comb bandwidth / swing
  double effective_depth = 0.0;
  std::optional<double> pit_depth;
  std::optional<double> residual;  // d~/d_pit - bandwidth/pit width
};

/// Trend of the period-averaged phase across the comb band, and the pit/comb balance.
inline DispersionReport dispersion_diagnostics(const AbsorptionProfile& p, double comb_lo, double comb_hi,
                                               double spacing_hz, std::optional<std::pair<double, double>> pit = {}) {
  const auto& g = p.grid;
  if (!g.contains(comb_lo, comb_hi)) throw std::invalid_argument("comb band lies outside the grid");
  if (pit && !g.contains(pit->first, pit->second)) throw std::invalid_argument("pit band lies outside the grid");
  const auto phase = kk_phase(p).phase;
  const std::size_t n = g.n_points;
  const double df = g.resolution();
  const auto w = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(spacing_hz / df)));
  std::vector<double> cum(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) cum[k + 1] = cum[k] + phase[k];

  const double c = 0.5 * (comb_lo + comb_hi), half = 0.5 * (comb_hi - comb_lo) - 0.5 * spacing_hz;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
  double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = g.frequency(k) - c;
    if (std::abs(x) <= 0.5 * spacing_hz) {
      pmin = std::min(pmin, phase[k]);
      pmax = std::max(pmax, phase[k]);
    }
    if (std::abs(x) > half || k < w / 2 || k + w - w / 2 > n) continue;
    const double y = (cum[k + w - w / 2] - cum[k - w / 2]) / static_cast<double>(w);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1.0;
  }
  DispersionReport r;
  const double den = cnt * sxx - sx * sx;
  r.slope_rad_per_hz = den > 0.0 ? (cnt * sxy - sx * sy) / den : 0.0;
  r.period_swing_rad = pmax - pmin;
  const double drift = std::abs(r.slope_rad_per_hz) * (comb_hi - comb_lo);
  r.relative_drift = r.period_swing_rad > 0.0 ? drift / r.period_swing_rad : (drift == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  r.effective_depth = effective_depth(p, comb_lo, comb_hi);
  if (pit) {
    const double pw = pit->second - pit->first, sh = 0.25 * pw;
    if (g.contains(pit->first - sh, pit->second + sh)) {
      const double dp = 0.5 * (effective_depth(p, pit->first - sh, pit->first) + effective_depth(p, pit->second, pit->second + sh));
      r.pit_depth = dp;
      if (dp > 0.0) r.residual = r.effective_depth / dp - (comb_hi - comb_lo) / pw;
    }
  }
  return r;
}

inline void write_csv(std::ostream& os, const std::vector<SweepResult>& sweeps) {
  os << "param_value,efficiency,scheme\n";
  for (const auto& s : sweeps)
    for (std::size_t i = 0; i < s.values.size(); ++i) csv::row(os, s.values[i], s.efficiencies[i], s.scheme);
}

}  // namespace afc
