#pragma once

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "afc/csv.hpp"
#include "afc/fft.hpp"
#include "afc/spectral.hpp"

namespace afc {

using cplx = std::complex<double>;

inline constexpr double speed_of_light = 299'792'458.0;

struct CavityParams {
  double r1 = 0.65;
  double r2 = 0.995;
  double d_loss = 0.012;
  double geometric_length_m = 4.9e-3;
  double refractive_index = 1.8;
  double air_gap_m = 0.0;
  double length_detuning_m = 0.0;
  double wavelength_m = 580e-9;

  double r2_effective() const { return r2 * std::exp(-2.0 * d_loss); }
  double round_trip_loss() const { return 2.0 * d_loss + (1.0 - r2); }
  double optical_path_m() const { return refractive_index * geometric_length_m + air_gap_m; }
  double round_trip_time() const { return 2.0 * optical_path_m() / speed_of_light; }
};

inline void check(const CavityParams& c) {
  if (!(c.r1 >= 0.0 && c.r1 <= 1.0)) throw std::invalid_argument("R1 must lie in [0, 1]");
  if (!(c.r2 >= 0.0 && c.r2 <= 1.0)) throw std::invalid_argument("R2 must lie in [0, 1]");
  if (!(c.d_loss >= 0.0)) throw std::invalid_argument("d_loss must be non-negative");
  if (!(c.geometric_length_m >= 0.0) || !(c.air_gap_m >= 0.0) || !(c.refractive_index > 0.0))
    throw std::invalid_argument("cavity lengths must be non-negative and the index positive");
  if (!(c.wavelength_m > 0.0)) throw std::invalid_argument("wavelength must be positive");
}

struct ComplexResponse {
  FrequencyGrid grid;
  std::vector<cplx> amplitude;
  std::vector<std::string> warnings;
};

struct PhaseResult {
  std::vector<double> phase;  // radians per pass
  std::vector<std::string> warnings;
};

struct Susceptibility {
  FrequencyGrid grid;
  std::vector<double> real;  // phase per pass
  std::vector<double> imag;  // field attenuation per pass, d/2
};

struct CavityAnalytics {
  double finesse = 0.0;
  double fsr_hz = 0.0;
  double linewidth_hz = 0.0;
};

namespace detail {

inline bool edges_flat(const std::vector<double>& d) {
  const std::size_t n = d.size(), m = std::max<std::size_t>(2, n / 100);
  const double scale = 1.0 + *std::max_element(d.begin(), d.end());
  const double tol = 1e-6 * scale;
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(d[i] - d[0]) > tol) return false;
    if (std::abs(d[n - 1 - i] - d[n - 1]) > tol) return false;
  }
  return std::abs(d[0] - d[n - 1]) <= tol;
}

// -Im of the causal continuation of a (centred order): the Hilbert transform used for the phase.
inline std::vector<double> hilbert_phase(const std::vector<double>& a) {
  const std::size_t n = a.size();
  std::vector<cplx> x(n);
  const auto ordered = fft::to_fft_order(a);
  for (std::size_t i = 0; i < n; ++i) x[i] = ordered[i];
  fft::inverse(x);
  for (std::size_t i = 1; i < n / 2; ++i) x[i] *= 2.0;
  for (std::size_t i = n / 2 + 1; i < n; ++i) x[i] = 0.0;
  fft::forward(x);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = -x[i].imag();
  return fft::from_fft_order(out);
}

}  // namespace detail

/// Phase per pass paired with d/2 so that exp(-d/2 - i*phase) is a causal transmission.
inline PhaseResult kk_phase(const AbsorptionProfile& p) {
  const std::size_t n = p.depth.size();
  PhaseResult out;
  if (detail::edges_flat(p.depth)) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = -0.5 * p.depth[i];
    out.phase = detail::hilbert_phase(a);
    return out;
  }
  out.warnings.push_back("profile edges are not flat; padded to 4x length with a cosine taper before the transform");
  const std::size_t m = 4 * n, pad = 3 * n;
  std::vector<double> a(m);
  const double lo = p.depth.front(), hi = p.depth.back();
  for (std::size_t i = 0; i < n; ++i) a[3 * n / 2 + i] = -0.5 * p.depth[i];
  for (std::size_t u = 0; u < pad; ++u) {
    double v;
    if (u < n)
      v = hi;
    else if (u >= 2 * n)
      v = lo;
    else
      v = hi + (lo - hi) * 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(u - n) / static_cast<double>(n)));
    a[(5 * n / 2 + u) % m] = -0.5 * v;
  }
  const auto ph = detail::hilbert_phase(a);
  out.phase.assign(ph.begin() + static_cast<std::ptrdiff_t>(3 * n / 2),
                   ph.begin() + static_cast<std::ptrdiff_t>(5 * n / 2));
  return out;
}

inline Susceptibility susceptibility(const AbsorptionProfile& p) {
  Susceptibility s{p.grid, kk_phase(p).phase, std::vector<double>(p.depth.size())};
  for (std::size_t i = 0; i < p.depth.size(); ++i) s.imag[i] = 0.5 * p.depth[i];
  return s;
}

inline ComplexResponse single_pass_response(const AbsorptionProfile& p) {
  auto ph = kk_phase(p);
  ComplexResponse r{p.grid, std::vector<cplx>(p.depth.size()), std::move(ph.warnings)};
  for (std::size_t i = 0; i < p.depth.size(); ++i) r.amplitude[i] = std::exp(cplx(-0.5 * p.depth[i], -ph.phase[i]));
  return r;
}

inline CavityAnalytics cavity_analytics(const CavityParams& c) {
  check(c);
  const double rr = c.r1 * c.r2_effective();
  if (rr >= 1.0) throw std::invalid_argument("R1*R2' must be below 1");
  CavityAnalytics a;
  const double g = std::sqrt(rr);
  a.finesse = std::numbers::pi * std::sqrt(g) / (1.0 - g);
  a.fsr_hz = speed_of_light / (2.0 * c.optical_path_m());
  a.linewidth_hz = a.finesse > 0.0 ? a.fsr_hz / a.finesse : std::numeric_limits<double>::infinity();
  return a;
}

/// Reflection of the cavity around the comb: two passes through the medium per round trip.
inline ComplexResponse cavity_reflection(const AbsorptionProfile& p, const CavityParams& c) {
  check(c);
  const auto an = cavity_analytics(c);
  if (p.grid.resolution() > an.linewidth_hz / 100.0)
    throw std::invalid_argument("grid resolution is too coarse for the cavity linewidth");
  auto ph = kk_phase(p);
  ComplexResponse r{p.grid, std::vector<cplx>(p.depth.size()), std::move(ph.warnings)};
  const double s1 = std::sqrt(c.r1), s2 = std::sqrt(c.r2_effective()), g = s1 * s2;
  const double tau = c.round_trip_time();
  const double theta0 = 4.0 * std::numbers::pi * c.length_detuning_m / c.wavelength_m;
  for (std::size_t i = 0; i < p.depth.size(); ++i) {
    const double theta = -2.0 * std::numbers::pi * (p.grid.frequency(i) - p.grid.center_offset_hz) * tau + theta0;
    const cplx rt = std::exp(cplx(-p.depth[i], theta - 2.0 * ph.phase[i]));
    r.amplitude[i] = (-s1 + s2 * rt) / (1.0 - g * rt);
  }
  return r;
}

struct ResonanceRT {
  double reflectivity = 0.0;
  double transmissivity = 0.0;
};

inline ResonanceRT resonance_rt(double r1, double r2, double d_loss, double d_eff, double eta_m) {
  if (!(r1 >= 0.0 && r1 <= 1.0) || !(r2 >= 0.0 && r2 <= 1.0) || !(eta_m >= 0.0 && eta_m <= 1.0))
    throw std::invalid_argument("R1, R2 and eta_M must lie in [0, 1]");
  if (!(d_loss >= 0.0) || !(d_eff >= 0.0)) throw std::invalid_argument("depths must be non-negative");
  const double a = std::exp(-(d_loss + d_eff));
  const double den = std::pow(1.0 - std::sqrt(r1 * r2) * a, 2);
  if (den == 0.0) throw std::invalid_argument("lossless unit-reflectivity cavity has no finite response");
  return {1.0 - (1.0 - r1) * (1.0 - r2 * a * a) / den * eta_m, (1.0 - r1) * (1.0 - r2) / den * eta_m};
}

struct LossFit {
  double d_loss = 0.0;
  double epsilon = 0.0;  // round-trip loss 2 d_loss + (1 - R2)
};

/// Solves for the loss on the under-coupled branch, below the impedance-matching loss.
inline LossFit infer_loss(double r_measured, double r1, double r2, double eta_m) {
  if (!(r_measured > 0.0 && r_measured < 1.0)) throw std::invalid_argument("measured reflectivity must lie in (0, 1)");
  auto f = [&](double x) { return resonance_rt(r1, r2, x, 0.0, eta_m).reflectivity - r_measured; };
  double hi = 1.0;
  if (r1 < r2) hi = std::min(1.0, -0.5 * std::log(r1 / r2));
  const double f0 = f(0.0), f1 = f(hi);
  if (f0 == 0.0) return {0.0, 1.0 - r2};
  if (f0 * f1 > 0.0) {
    std::ostringstream os;
    os << "reflectivity " << r_measured << " is unreachable for d_loss in [0, " << hi << "] (R ranges "
       << std::min(f0, f1) + r_measured << " to " << std::max(f0, f1) + r_measured << ")";
    throw std::invalid_argument(os.str());
  }
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) < 1e-14; };
  const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, f0, f1, tol, iters);
  const double d = 0.5 * (a + b);
  return {d, 2.0 * d + (1.0 - r2)};
}

inline double infer_mode_matching(double r_matched) {
  if (!(r_matched >= 0.0 && r_matched <= 1.0)) throw std::invalid_argument("reflectivity must lie in [0, 1]");
  return 1.0 - r_matched;
}

struct GaussianMode {
  double waist_m = 0.0;
  double effective_length_m = 0.0;
};

/// Plano-concave cavity with a dielectric membrane on the flat mirror.
inline GaussianMode gaussian_mode(double wavelength_m, double membrane_m, double n0, double air_gap_m, double roc_m) {
  if (!(wavelength_m > 0.0) || !(n0 > 0.0) || membrane_m < 0.0 || air_gap_m < 0.0)
    throw std::invalid_argument("invalid mode geometry");
  const double l = membrane_m / n0 + air_gap_m;
  if (l >= roc_m) throw std::invalid_argument("effective length must be shorter than the mirror radius of curvature");
  return {std::sqrt(wavelength_m / std::numbers::pi) * std::pow(l * (roc_m - l), 0.25), l};
}

inline double mode_match(double w0, double wc) {
  if (!(w0 > 0.0) || !(wc > 0.0)) throw std::invalid_argument("waists must be positive");
  const double v = 2.0 * w0 * wc / (w0 * w0 + wc * wc);
  return v * v;
}

inline void write_csv(std::ostream& os, const ComplexResponse& r) {
  os << "freq_hz,re,im,mag2\n";
  for (std::size_t k = 0; k < r.amplitude.size(); ++k)
    csv::row(os, r.grid.frequency(k), r.amplitude[k].real(), r.amplitude[k].imag(), std::norm(r.amplitude[k]));
}

}  // namespace afc
