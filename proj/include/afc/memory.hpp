#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "afc/csv.hpp"
#include "afc/detail/gmres.hpp"
#include "afc/fft.hpp"
#include "afc/response.hpp"
#include "afc/spectral.hpp"

namespace afc {

struct Pulse {
  double center_s = 0.0;
  double fwhm_s = 0.45e-6;  // intensity FWHM
  cplx amplitude{1.0, 0.0};

  cplx field(double t) const {
    const double x = (t - center_s) / fwhm_s;
    return amplitude * std::exp(-2.0 * std::numbers::ln2 * x * x);
  }
};

struct PulseTrain {
  std::vector<Pulse> pulses;
  double mean_photon_number = 0.0;
};

struct EchoWindow {
  double start_s = 0.0;
  double end_s = 0.0;
  int mode = 0;  // pulse whose input energy normalises this window
};

struct StarkSchedule {
  std::vector<double> pulse_times_s;  // after the first input pulse centre
  double per_pulse_phase = std::numbers::pi;
};

struct EchoResult {
  double time_start_s = 0.0;
  double time_step_s = 0.0;
  std::vector<double> intensity;  // eta_M |E_out|^2
  std::vector<EchoWindow> windows;
  std::vector<double> efficiencies;  // one per window
  std::vector<double> mode_energies;
  double input_energy = 0.0;
  double output_energy = 0.0;  // |E_out|^2 integrated, without eta_M
  double parseval_error = 0.0;
  double edge_fraction = 0.0;
  double max_reflectance = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr double dephasing_constant = std::numbers::pi * std::numbers::pi / (2.0 * std::numbers::ln2);

inline double dephasing_factor(double finesse) { return std::exp(-dephasing_constant / (finesse * finesse)); }

inline double afc_lifetime_factor(double storage_time_s, double lifetime_s) {
  return std::exp(-4.0 * storage_time_s / lifetime_s);
}

namespace detail {

inline void check_train(const PulseTrain& train, double record) {
  if (train.pulses.empty()) throw std::invalid_argument("pulse train is empty");
  for (std::size_t i = 0; i < train.pulses.size(); ++i) {
    const auto& p = train.pulses[i];
    if (!(p.fwhm_s > 0.0)) throw std::invalid_argument("pulse FWHM must be positive");
    if (p.center_s - 3.0 * p.fwhm_s < 0.0 || p.center_s + 3.0 * p.fwhm_s > record)
      throw std::invalid_argument("pulse lies outside the time record");
    if (i > 0 && p.center_s < train.pulses[i - 1].center_s) throw std::invalid_argument("pulses must be time ordered");
  }
}

inline void check_windows(const std::vector<EchoWindow>& w, const PulseTrain& train, double t0, double t1) {
  for (const auto& win : w) {
    if (!(win.end_s > win.start_s)) throw std::invalid_argument("echo window must be nonempty");
    if (win.start_s < t0 || win.end_s > t1) {
      std::ostringstream os;
      os << "echo window [" << win.start_s << ", " << win.end_s << "] s lies outside the time record";
      throw std::invalid_argument(os.str());
    }
    if (win.mode < 0 || win.mode >= static_cast<int>(train.pulses.size()))
      throw std::invalid_argument("echo window refers to a missing input pulse");
    for (const auto& p : train.pulses)
      if (win.start_s < p.center_s + p.fwhm_s && win.end_s > p.center_s - p.fwhm_s) {
        std::ostringstream os;
        os << "echo window [" << win.start_s << ", " << win.end_s << "] s overlaps the input pulse at " << p.center_s
           << " s";
        throw std::invalid_argument(os.str());
      }
  }
}

inline double window_sum(const std::vector<double>& v, double t0, double dt, const EchoWindow& w) {
  double s = 0.0;
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  const auto a = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil((w.start_s - t0) / dt - 1e-9)));
  const auto b = std::min<std::ptrdiff_t>(n, static_cast<std::ptrdiff_t>(std::ceil((w.end_s - t0) / dt - 1e-9)));
  for (auto k = a; k < b; ++k) s += v[static_cast<std::size_t>(k)];
  return s;
}

inline void fill_efficiencies(EchoResult& r, const std::vector<EchoWindow>& windows) {
  r.windows = windows;
  for (const auto& w : windows)
    r.efficiencies.push_back(window_sum(r.intensity, r.time_start_s, r.time_step_s, w) * r.time_step_s /
                             r.mode_energies[static_cast<std::size_t>(w.mode)]);
}

}  // namespace detail

/// Windows centred on the order-th echo of each pulse; the default half-width keeps neighbours apart.
inline std::vector<EchoWindow> echo_windows(const PulseTrain& train, double spacing_hz, int order = 1,
                                            std::optional<double> half_width = std::nullopt) {
  const double period = 1.0 / spacing_hz;
  double hw = half_width.value_or(0.5 * period);
  if (!half_width) {
    for (const auto& p : train.pulses) hw = std::min(hw, 3.0 * p.fwhm_s);
    for (std::size_t i = 1; i < train.pulses.size(); ++i)
      hw = std::min(hw, 0.5 * (train.pulses[i].center_s - train.pulses[i - 1].center_s));
  }
  std::vector<EchoWindow> out;
  for (std::size_t i = 0; i < train.pulses.size(); ++i) {
    const double c = train.pulses[i].center_s + order * period;
    out.push_back({c - hw, c + hw, static_cast<int>(i)});
  }
  return out;
}

/// Linear propagation of the input train through the cavity reflection, evaluated on the grid's time record.
inline EchoResult simulate_storage(const ComplexResponse& r, const PulseTrain& train, double eta_m,
                                   const std::vector<EchoWindow>& windows) {
  const auto& g = r.grid;
  require_echo_resolution(g);
  if (!(eta_m >= 0.0 && eta_m <= 1.0)) throw std::invalid_argument("mode matching must lie in [0, 1]");
  const std::size_t n = g.n_points;
  const double dt = g.time_step(), record = g.record_length();
  detail::check_train(train, record);
  detail::check_windows(windows, train, 0.0, record);

  EchoResult res;
  res.time_step_s = dt;
  res.warnings = r.warnings;
  std::vector<cplx> e(n, 0.0);
  for (const auto& p : train.pulses) {
    double en = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const cplx v = p.field(static_cast<double>(k) * dt);
      e[k] += v;
      en += std::norm(v);
    }
    res.mode_energies.push_back(en * dt);
  }
  for (const auto& v : e) res.input_energy += std::norm(v) * dt;

  const auto rr = fft::to_fft_order(r.amplitude);
  fft::forward(e);
  double spec_energy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    e[j] *= rr[j];
    spec_energy += std::norm(e[j]);
    res.max_reflectance = std::max(res.max_reflectance, std::norm(rr[j]));
  }
  spec_energy *= dt / static_cast<double>(n);
  fft::inverse(e);

  res.intensity.resize(n);
  double edge = 0.0;
  const std::size_t m = n / 50;
  for (std::size_t k = 0; k < n; ++k) {
    const double i2 = std::norm(e[k]);
    res.output_energy += i2 * dt;
    if (k < m || k >= n - m) edge += i2 * dt;
    res.intensity[k] = eta_m * i2;
  }
  res.parseval_error = std::abs(res.output_energy - spec_energy) / std::max(spec_energy, 1e-300);
  res.edge_fraction = res.output_energy > 0.0 ? edge / res.output_energy : 0.0;
  if (res.edge_fraction > 1e-6) {
    std::ostringstream os;
    os << "time-domain aliasing: " << res.edge_fraction << " of the output energy sits at the record edges";
    throw std::runtime_error(os.str());
  }
  detail::fill_efficiencies(res, windows);
  return res;
}

inline EchoResult simulate_storage(const AbsorptionProfile& profile, const CavityParams& cavity, const PulseTrain& train,
                                   double eta_m, const std::vector<EchoWindow>& windows) {
  return simulate_storage(cavity_reflection(profile, cavity), train, eta_m, windows);
}

struct AnalyticEfficiency {
  double efficiency = 0.0;
  double dephasing = 0.0;
  double cavity_factor = 0.0;
  double loss_ratio = 0.0;  // epsilon / (4 d~)
};

inline AnalyticEfficiency analytic_efficiency_from_ratio(double eta_m, double finesse, double loss_ratio) {
  if (!(loss_ratio >= 0.0)) throw std::invalid_argument("loss ratio must be non-negative");
  AnalyticEfficiency a;
  a.loss_ratio = loss_ratio;
  a.dephasing = dephasing_factor(finesse);
  a.cavity_factor = std::pow(1.0 + loss_ratio, -4.0);
  a.efficiency = eta_m * a.dephasing * a.cavity_factor;
  return a;
}

inline AnalyticEfficiency analytic_efficiency(double eta_m, double finesse, double epsilon, double d_eff) {
  if (!(d_eff > 0.0)) throw std::invalid_argument("effective depth must be positive");
  return analytic_efficiency_from_ratio(eta_m, finesse, epsilon / (4.0 * d_eff));
}

/// Cavity-enhanced echo of order n; r2p is the lossy second-mirror reflectivity.
inline double stark_echo_efficiency(double d_eff, double r1, double r2p, double finesse, int order) {
  if (!(r1 >= 0.0 && r1 < 1.0) || !(r2p >= 0.0 && r2p <= 1.0)) throw std::invalid_argument("invalid reflectivities");
  if (!(d_eff >= 0.0)) throw std::invalid_argument("effective depth must be non-negative");
  const double den = std::pow(1.0 - std::sqrt(r1 * r2p) * std::exp(-d_eff), 4);
  const double pre = 4.0 * d_eff * d_eff * std::exp(-2.0 * d_eff) * std::pow(1.0 - r1, 2) * r2p / den;
  return pre * std::pow(dephasing_factor(finesse), static_cast<double>(order) * order);
}

inline void validate_schedule(const StarkSchedule& s, double spacing_hz) {
  const double period = 1.0 / spacing_hz;
  for (std::size_t i = 0; i < s.pulse_times_s.size(); ++i) {
    const double t = s.pulse_times_s[i];
    const double u = t / period;
    const double frac = u - std::floor(u);
    if (i == 0 && !(t > 0.0 && t < period)) throw std::invalid_argument("first electric pulse must fall before the first echo");
    if (i > 0 && t <= s.pulse_times_s[i - 1]) throw std::invalid_argument("electric pulses must be time ordered");
    if (frac < 1e-6 || frac > 1.0 - 1e-6) throw std::invalid_argument("electric pulse coincides with an echo time");
  }
}

/// Suppress echoes 1..n-1 and recall at order n: kicks at 0.5/spacing and (n - 0.5)/spacing.
inline StarkSchedule schedule_for_order(int order, double spacing_hz, double phase = std::numbers::pi) {
  if (order <= 1) return StarkSchedule{{}, phase};
  return StarkSchedule{{0.5 / spacing_hz, (order - 0.5) / spacing_hz}, phase};
}

/// Two equal sub-ensembles receive opposite phase kicks; the cavity fixed point is solved in the time domain.
inline EchoResult simulate_stark_readout(const AbsorptionProfile& profile, const CavityParams& cavity,
                                         const PulseTrain& train, const StarkSchedule& schedule, double eta_m,
                                         const std::vector<EchoWindow>& windows, double spacing_hz) {
  const auto& g = profile.grid;
  require_echo_resolution(g);
  check(cavity);
  validate_schedule(schedule, spacing_hz);
  const double dt = g.time_step(), record = g.record_length();
  detail::check_train(train, record);
  const std::size_t n = g.n_points;

  const auto ph = kk_phase(profile);
  std::vector<cplx> k0(n);
  {
    std::vector<cplx> lt(n);
    for (std::size_t i = 0; i < n; ++i) lt[i] = cplx(-0.5 * profile.depth[i], -ph.phase[i]);
    k0 = fft::to_fft_order(lt);
    fft::inverse(k0);
  }

  double fmax = 0.0, t_last = train.pulses.front().center_s;
  for (const auto& p : train.pulses) fmax = std::max(fmax, p.fwhm_s);
  for (const auto& w : windows) t_last = std::max(t_last, w.end_s);
  const double t_ref = train.pulses.front().center_s;
  const double t_start = std::max(0.0, t_ref - 6.0 * fmax);
  const double t_end = t_last + 0.5e-6;
  if (t_end > record) throw std::invalid_argument("echo window lies outside the time record");
  const auto nw = static_cast<std::size_t>(std::ceil((t_end - t_start) / dt));
  detail::check_windows(windows, train, t_start, t_start + static_cast<double>(nw) * dt);
  std::size_t m = 1;
  while (m < 2 * nw) m *= 2;

  std::vector<cplx> kernel(m, 0.0);
  double l1 = 0.0;
  for (std::size_t i = 0; i < nw; ++i) {
    kernel[i] = k0[i];
    l1 += std::abs(k0[i]);
  }
  fft::forward(kernel);

  std::vector<cplx> u(nw, 1.0);
  {
    double theta = 0.0;
    std::size_t next = 0;
    for (std::size_t i = 0; i < nw; ++i) {
      const double t = t_start + static_cast<double>(i) * dt - t_ref;
      while (next < schedule.pulse_times_s.size() && t > schedule.pulse_times_s[next]) {
        theta += (next % 2 == 0 ? 0.5 : -0.5) * schedule.per_pulse_phase;
        ++next;
      }
      u[i] = std::polar(1.0, theta);
    }
  }

  using detail::cvec;
  auto conv = [&](const cvec& v) {
    cvec x(m, 0.0);
    std::copy(v.begin(), v.end(), x.begin());
    fft::forward(x);
    for (std::size_t i = 0; i < m; ++i) x[i] *= kernel[i];
    fft::inverse(x);
    x.resize(nw);
    return x;
  };
  auto apply_k = [&](const cvec& v) {
    cvec a(nw), b(nw);
    for (std::size_t i = 0; i < nw; ++i) {
      a[i] = std::conj(u[i]) * v[i];
      b[i] = u[i] * v[i];
    }
    a = conv(a);
    b = conv(b);
    cvec out(nw);
    for (std::size_t i = 0; i < nw; ++i) out[i] = 0.5 * (u[i] * a[i] + std::conj(u[i]) * b[i]);
    return out;
  };
  const int steps = std::max(8, static_cast<int>(std::ceil(4.0 * l1)));
  auto round_trip = [&](cvec v) {
    const double h = 2.0 / steps;
    for (int s = 0; s < steps; ++s) {
      cvec acc = v, term = v;
      for (int j = 1; j < 200; ++j) {
        term = apply_k(term);
        for (auto& x : term) x *= h / j;
        for (std::size_t i = 0; i < nw; ++i) acc[i] += term[i];
        if (detail::norm2(term) < 1e-16 * detail::norm2(acc)) break;
      }
      v = std::move(acc);
    }
    return v;
  };

  const double s1 = std::sqrt(cavity.r1), s2 = std::sqrt(cavity.r2_effective());
  const cplx detune = std::polar(1.0, 4.0 * std::numbers::pi * cavity.length_detuning_m / cavity.wavelength_m);
  const cplx loop = s1 * s2 * detune;
  const double a_in = std::sqrt(1.0 - cavity.r1);

  EchoResult res;
  res.time_start_s = t_start;
  res.time_step_s = dt;
  res.warnings = ph.warnings;
  cvec e(nw, 0.0), rhs(nw);
  for (const auto& p : train.pulses) {
    double en = 0.0;
    for (std::size_t k = 0; k < n; ++k) en += std::norm(p.field(static_cast<double>(k) * dt));
    res.mode_energies.push_back(en * dt);
    for (std::size_t i = 0; i < nw; ++i) e[i] += p.field(t_start + static_cast<double>(i) * dt);
  }
  for (const auto& v : e) res.input_energy += std::norm(v) * dt;
  for (std::size_t i = 0; i < nw; ++i) rhs[i] = a_in * e[i];

  auto sol = detail::gmres(
      [&](const cvec& x) {
        cvec y = round_trip(x);
        for (std::size_t i = 0; i < nw; ++i) y[i] = x[i] - loop * y[i];
        return y;
      },
      rhs, 1e-12);
  const cvec back = round_trip(sol.x);
  const cplx out_gain = a_in * s2 * detune;
  res.intensity.resize(nw);
  for (std::size_t i = 0; i < nw; ++i) {
    const cplx eo = -s1 * e[i] + out_gain * back[i];
    res.output_energy += std::norm(eo) * dt;
    res.intensity[i] = eta_m * std::norm(eo);
  }
  detail::fill_efficiencies(res, windows);
  return res;
}

struct PoleCounts {
  double signal = 0.0;
  double noise = 0.0;
};

struct QubitFidelity {
  double early = 0.0;
  double late = 0.0;
  double plus = 0.0;
  double plus_i = 0.0;
  double poles = 0.0;
  double superpositions = 0.0;
  double total = 0.0;
};

inline double pole_fidelity(PoleCounts c) {
  if (c.signal < 0.0 || c.noise < 0.0) throw std::invalid_argument("counts must be non-negative");
  if (c.signal + c.noise == 0.0) throw std::invalid_argument("pole measurement has no counts");
  return (c.signal + c.noise) / (c.signal + 2.0 * c.noise);
}

inline double superposition_fidelity(double visibility) {
  if (!(visibility >= -1.0 && visibility <= 1.0)) throw std::invalid_argument("visibility must lie in [-1, 1]");
  return 0.5 * (visibility + 1.0);
}

inline double total_fidelity(double poles, double superpositions) { return poles / 3.0 + 2.0 * superpositions / 3.0; }

inline QubitFidelity qubit_fidelity(PoleCounts early, PoleCounts late, double v_plus, double v_plus_i) {
  QubitFidelity f;
  f.early = pole_fidelity(early);
  f.late = pole_fidelity(late);
  f.plus = superposition_fidelity(v_plus);
  f.plus_i = superposition_fidelity(v_plus_i);
  f.poles = 0.5 * (f.early + f.late);
  f.superpositions = 0.5 * (f.plus + f.plus_i);
  f.total = total_fidelity(f.poles, f.superpositions);
  return f;
}

enum class MMinConvention { literal, at_least_one };

inline const char* to_string(MMinConvention c) { return c == MMinConvention::literal ? "literal" : "at_least_one"; }

struct ClassicalBound {
  int m_min = 0;
  double fidelity = 0.0;
};

/// Best measure-and-prepare fidelity for Poissonian input with mean mu and memory efficiency eta.
inline ClassicalBound classical_bound(double mu, double eta, MMinConvention conv) {
  if (!(mu > 0.0)) throw std::invalid_argument("mean photon number must be positive");
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("efficiency must lie in (0, 1]");
  std::vector<double> p{std::exp(-mu)};
  for (int m = 1;; ++m) {
    p.push_back(p.back() * mu / m);
    if (m > mu && p.back() < 1e-12) break;
  }
  auto tail = [&](int from) {
    double s = 0.0;
    for (std::size_t m = p.size(); m-- > static_cast<std::size_t>(std::max(0, from));) s += p[m];
    return s;
  };
  const double captured = (1.0 - p[0]) * eta;
  int i = conv == MMinConvention::literal ? 0 : 1;
  while (captured - tail(i + 2) < 0.0) ++i;
  const double gamma = captured - tail(i + 2);
  double num = (i + 1.0) / (i + 2.0) * gamma, den = gamma;
  for (std::size_t m = static_cast<std::size_t>(i + 1); m < p.size(); ++m) {
    num += (m + 1.0) / (m + 2.0) * p[m];
    den += p[m];
  }
  return {i, num / den};
}

struct DecayFit {
  double slope = 0.0;  // d ln(eta) / d n^2
  double intercept = 0.0;
  double finesse = 0.0;
  std::vector<double> residuals;
};

inline DecayFit fit_echo_decay(const std::vector<int>& orders, const std::vector<double>& efficiency) {
  if (orders.size() != efficiency.size() || orders.size() < 2) throw std::invalid_argument("need at least two echo orders");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const double x = static_cast<double>(orders[i]) * orders[i], y = std::log(efficiency[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  DecayFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  f.finesse = f.slope < 0.0 ? std::sqrt(-dephasing_constant / f.slope) : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < orders.size(); ++i)
    f.residuals.push_back(std::log(efficiency[i]) - (f.intercept + f.slope * orders[i] * orders[i]));
  return f;
}

/// Visibility of I(phi) = a + b cos(phi) + c sin(phi) from a least-squares fit.
inline double fit_visibility(const std::vector<double>& phases, const std::vector<double>& values) {
  double m[3][4] = {};
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const double f[3] = {1.0, std::cos(phases[i]), std::sin(phases[i])};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += f[r] * f[c];
      m[r][3] += f[r] * values[i];
    }
  }
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r)
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    for (int k = 0; k < 4; ++k) std::swap(m[c][k], m[piv][k]);
    for (int r = 0; r < 3; ++r) {
      if (r == c) continue;
      const double q = m[r][c] / m[c][c];
      for (int k = 0; k < 4; ++k) m[r][k] -= q * m[c][k];
    }
  }
  const double a = m[0][3] / m[0][0], b = m[1][3] / m[1][1], c = m[2][3] / m[2][2];
  return std::hypot(b, c) / a;
}

struct TimeBinSetup {
  double first_center_s = 10e-6;
  double separation_s = 0.52e-6;
  double fwhm_s = 0.19e-6;
  double storage_time_s = 2e-6;
};

struct TimeBinReport {
  PoleCounts early;
  PoleCounts late;
  std::vector<double> phases;
  std::vector<double> interference;
  double visibility_plus = 0.0;
  double visibility_plus_i = 0.0;
  QubitFidelity fidelity;
};

namespace detail {

inline PulseTrain time_bin_train(const TimeBinSetup& s, cplx early, cplx late) {
  PulseTrain t;
  t.pulses.push_back({s.first_center_s, s.fwhm_s, early});
  t.pulses.push_back({s.first_center_s + s.separation_s, s.fwhm_s, late});
  return t;
}

inline std::vector<cplx> propagate(const ComplexResponse& r, const PulseTrain& t,
                                   const std::function<cplx(double)>& extra = {}) {
  const auto& g = r.grid;
  const std::size_t n = g.n_points;
  const double dt = g.time_step();
  std::vector<cplx> e(n, 0.0);
  for (const auto& p : t.pulses)
    for (std::size_t k = 0; k < n; ++k) e[k] += p.field(static_cast<double>(k) * dt);
  fft::forward(e);
  const auto rr = fft::to_fft_order(r.amplitude);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] *= rr[j];
    if (extra) {
      const double nu = (j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n)) * g.resolution();
      e[j] *= extra(nu);
    }
  }
  fft::inverse(e);
  return e;
}

inline double energy_in(const std::vector<cplx>& e, double dt, double t0, double t1) {
  double s = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    const double t = static_cast<double>(k) * dt;
    if (t >= t0 && t < t1) s += std::norm(e[k]);
  }
  return s * dt;
}

inline void pole_counts(TimeBinReport& rep, const ComplexResponse& r, const TimeBinSetup& s, double eta_m) {
  const double dt = r.grid.time_step(), hw = std::min(0.5 * s.separation_s, 3.0 * s.fwhm_s);
  const double te = s.first_center_s + s.storage_time_s, tl = te + s.separation_s;
  const auto e = propagate(r, time_bin_train(s, 1.0, 0.0));
  const auto l = propagate(r, time_bin_train(s, 0.0, 1.0));
  rep.early = {eta_m * energy_in(e, dt, te - hw, te + hw), eta_m * energy_in(e, dt, tl - hw, tl + hw)};
  rep.late = {eta_m * energy_in(l, dt, tl - hw, tl + hw), eta_m * energy_in(l, dt, te - hw, te + hw)};
}

}  // namespace detail

/// Early/late qubit stored in the memory, then read through an unbalanced two-path analyzer of delay T.
inline TimeBinReport analyze_two_path(const ComplexResponse& r, double eta_m, const TimeBinSetup& s, int n_phases = 16) {
  TimeBinReport rep;
  detail::pole_counts(rep, r, s, eta_m);
  const double dt = r.grid.time_step(), hw = std::min(0.5 * s.separation_s, 3.0 * s.fwhm_s);
  const double tc = s.first_center_s + s.storage_time_s + s.separation_s;
  auto analyzer = [&](double nu) { return 0.5 * (1.0 + std::polar(1.0, -2.0 * std::numbers::pi * nu * s.separation_s)); };
  std::vector<double> plus_i;
  for (int k = 0; k < n_phases; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / n_phases;
    rep.phases.push_back(phi);
    const double inv = 1.0 / std::numbers::sqrt2;
    auto out = detail::propagate(r, detail::time_bin_train(s, inv, std::polar(inv, phi)), analyzer);
    rep.interference.push_back(eta_m * detail::energy_in(out, dt, tc - hw, tc + hw));
    out = detail::propagate(r, detail::time_bin_train(s, inv, std::polar(inv, phi + 0.5 * std::numbers::pi)), analyzer);
    plus_i.push_back(eta_m * detail::energy_in(out, dt, tc - hw, tc + hw));
  }
  rep.visibility_plus = fit_visibility(rep.phases, rep.interference);
  rep.visibility_plus_i = fit_visibility(rep.phases, plus_i);
  rep.fidelity = qubit_fidelity(rep.early, rep.late, rep.visibility_plus, rep.visibility_plus_i);
  return rep;
}

/// Superposition read through a double comb: early stored for the longer time meets late stored for the shorter one.
/// `respond(df)` returns the cavity reflection with the second comb detuned by df; the scan covers one period of it.
inline TimeBinReport analyze_double_comb(const ComplexResponse& single, const std::function<ComplexResponse(double)>& respond,
                                         double second_spacing_hz, double eta_m, const TimeBinSetup& s,
                                         int n_phases = 12) {
  TimeBinReport rep;
  detail::pole_counts(rep, single, s, eta_m);
  const double hw = std::min(0.5 * s.separation_s, 3.0 * s.fwhm_s);
  const double tc = s.first_center_s + s.separation_s + s.storage_time_s;
  const double inv = 1.0 / std::numbers::sqrt2;
  std::vector<double> plus_i;
  for (int k = 0; k < n_phases; ++k) {
    const double df = second_spacing_hz * k / n_phases;
    rep.phases.push_back(2.0 * std::numbers::pi * k / n_phases);
    const auto r = respond(df);
    const double dt = r.grid.time_step();
    auto out = detail::propagate(r, detail::time_bin_train(s, inv, inv));
    rep.interference.push_back(eta_m * detail::energy_in(out, dt, tc - hw, tc + hw));
    out = detail::propagate(r, detail::time_bin_train(s, inv, cplx(0.0, inv)));
    plus_i.push_back(eta_m * detail::energy_in(out, dt, tc - hw, tc + hw));
  }
  rep.visibility_plus = fit_visibility(rep.phases, rep.interference);
  rep.visibility_plus_i = fit_visibility(rep.phases, plus_i);
  rep.fidelity = qubit_fidelity(rep.early, rep.late, rep.visibility_plus, rep.visibility_plus_i);
  return rep;
}

inline void write_csv(std::ostream& os, const EchoResult& r) {
  os << "time_s,intensity\n";
  for (std::size_t k = 0; k < r.intensity.size(); ++k)
    csv::row(os, r.time_start_s + static_cast<double>(k) * r.time_step_s, r.intensity[k]);
}

}  // namespace afc
