#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "afc/config.hpp"
#include "afc/csv.hpp"
#include "afc/ions.hpp"
#include "afc/memory.hpp"
#include "afc/optimize.hpp"
#include "afc/response.hpp"
#include "afc/spectral.hpp"
#include "afc/svg.hpp"

namespace afc::scenario {

using config::json;
using config::ScenarioConfig;

struct RunOptions {
  std::optional<int> modes;
  std::optional<double> afc_lifetime_s;
  std::optional<std::string> output_dir;
  unsigned threads = 0;
};

struct RunOutcome {
  json result;
  std::vector<std::filesystem::path> files;
};

/// Writes through a temporary sibling so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Applies command-line overrides. A multimode train longer than the storage time gets a finer comb
/// (1/spacing = count * mode spacing + 1 us), a grid fine enough for the narrower teeth, and a first
/// pulse clear of the aliasing guard band; each adjustment is listed in the returned notes.
inline std::vector<std::string> apply_overrides(ScenarioConfig& c, const RunOptions& o) {
  std::vector<std::string> notes;
  if (o.output_dir) c.output_dir = *o.output_dir;
  if (o.afc_lifetime_s) c.analysis.afc_lifetime_s = *o.afc_lifetime_s;
  if (!o.modes) return notes;
  if (*o.modes < 1) throw config::ConfigError({{"--modes", "must be at least 1", ""}});
  c.pulses.count = *o.modes;
  if (c.pulses.count == 1) return notes;
  auto& cb = c.profile.comb;
  const double needed = c.pulses.count * c.pulses.spacing_s + 1e-6;
  std::ostringstream os;
  if (1.0 / cb.spacing_hz < needed) {
    cb.spacing_hz = 1.0 / needed;
    os << "comb spacing set to " << cb.spacing_hz << " Hz to hold " << c.pulses.count << " modes";
    notes.push_back(os.str());
    os.str("");
  }
  const std::size_t n0 = c.grid.n_points;
  while (cb.tooth_width() / c.grid.resolution() < 6.0 && c.grid.n_points < (1u << 22)) c.grid.n_points *= 2;
  if (c.grid.n_points != n0) {
    os << "grid n_points raised to " << c.grid.n_points << " to resolve " << cb.tooth_width() << " Hz teeth";
    notes.push_back(os.str());
    os.str("");
  }
  const double guard = c.grid.record_length() / 50.0 + 3.0 * c.pulses.fwhm_s + 1e-6;
  if (c.pulses.first_center_s < guard) {
    c.pulses.first_center_s = std::ceil(guard * 1e6) * 1e-6;
    os << "first pulse moved to " << c.pulses.first_center_s << " s, clear of the record edge";
    notes.push_back(os.str());
  }
  return notes;
}

/// Base features plus the (optionally truncated) comb.
inline ProfileResult build_profile(const ScenarioConfig& c) {
  auto base = synthesize_profile(c.profile.features, c.profile.base_depth, c.grid);
  const auto comb = c.profile.carved_teeth ? truncated_comb_profile(c.profile.comb, c.grid, *c.profile.carved_teeth)
                                           : comb_profile(c.profile.comb, c.grid);
  return {add_profiles(base.profile, comb), std::move(base.warnings)};
}

namespace detail {

inline json analytic_json(const AnalyticEfficiency& a) {
  return {{"efficiency", a.efficiency},
          {"dephasing", a.dephasing},
          {"cavity_factor", a.cavity_factor},
          {"loss_ratio", a.loss_ratio}};
}

inline double comb_band_depth(const AbsorptionProfile& p, const CombSpec& cb) {
  const double c0 = p.grid.center_offset_hz;
  return effective_depth(p, c0 - 0.5 * cb.bandwidth_hz, c0 + 0.5 * cb.bandwidth_hz);
}

inline std::string trace_csv(const EchoResult& r, double t0, double t1) {
  std::ostringstream os;
  os << "time_s,intensity\n";
  for (std::size_t k = 0; k < r.intensity.size(); ++k) {
    const double t = r.time_start_s + static_cast<double>(k) * r.time_step_s;
    if (t >= t0 && t <= t1) csv::row(os, t, r.intensity[k]);
  }
  return os.str();
}

inline std::string trace_svg(const EchoResult& r, double t0, double t1, const std::string& label) {
  svg::Series s{label, {}, {}};
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>((t1 - t0) / r.time_step_s / 2000.0));
  for (std::size_t k = 0; k < r.intensity.size(); k += stride) {
    const double t = r.time_start_s + static_cast<double>(k) * r.time_step_s;
    if (t >= t0 && t <= t1) {
      s.x.push_back(t * 1e6);
      s.y.push_back(r.intensity[k]);
    }
  }
  return svg::line_plot({s}, "time (us)", "output intensity");
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline json common_checks(const EchoResult& r, std::vector<std::string> warnings) {
  bool unit = true;
  for (double e : r.efficiencies) unit &= e >= 0.0 && e <= 1.0;
  for (const auto& w : r.warnings) warnings.push_back(w);
  return {{"parseval_relative_error", r.parseval_error},
          {"parseval_ok", r.parseval_error < 1e-9},
          {"max_reflectance", r.max_reflectance},
          {"passive", r.max_reflectance <= 1.0 + 1e-12},
          {"edge_energy_fraction", r.edge_fraction},
          {"efficiencies_in_unit_interval", unit},
          {"warnings", warnings}};
}

struct Files {
  std::filesystem::path dir;
  std::vector<std::filesystem::path>* out;
  void write(const std::string& name, const std::string& content) const {
    write_atomic(dir / name, content);
    out->push_back(dir / name);
  }
};

// ------------------------------------------------------------------ scenarios

inline json run_storage(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes) {
  const auto prof = build_profile(c);
  for (const auto& w : prof.warnings) notes.push_back(w);
  const auto train = config::pulse_train(c);
  const auto windows = echo_windows(train, c.profile.comb.spacing_hz, c.analysis.echo_order, c.analysis.window_half_width_s);
  const auto res = simulate_storage(prof.profile, c.cavity, train, c.mode_matching, windows);

  const auto match = matched_depth(c.cavity);
  const double d_real = comb_band_depth(prof.profile, c.profile.comb);
  json eff = {{"per_mode", res.efficiencies},
              {"mean", mean(res.efficiencies)},
              {"min", *std::min_element(res.efficiencies.begin(), res.efficiencies.end())},
              {"max", *std::max_element(res.efficiencies.begin(), res.efficiencies.end())},
              {"with_afc_lifetime", nullptr}};
  eff["spread"] = eff["max"].get<double>() - eff["min"].get<double>();
  if (c.analysis.afc_lifetime_s) {
    const double t = c.analysis.echo_order / c.profile.comb.spacing_hz;
    const double k = afc_lifetime_factor(t, *c.analysis.afc_lifetime_s);
    std::vector<double> scaled;
    for (double e : res.efficiencies) scaled.push_back(e * k);
    eff["with_afc_lifetime"] = {{"storage_time_s", t}, {"factor", k}, {"per_mode", scaled}, {"mean", mean(scaled)}};
  }
  json analytic = {
      {"matched", analytic_json(analytic_efficiency_from_ratio(c.mode_matching, c.profile.comb.finesse, match.loss_ratio))},
      {"realized", d_real > 0.0 ? analytic_json(analytic_efficiency(c.mode_matching, c.profile.comb.finesse,
                                                                    match.epsilon, d_real))
                                : json(nullptr)},
      {"matched_depth", match.matched_depth},
      {"effective_depth", d_real},
      {"epsilon", match.epsilon}};
  json checks = common_checks(res, notes);
  const auto& p0 = train.pulses.front();
  const double period = 1.0 / c.profile.comb.spacing_hz;
  const double pre0 = p0.center_s + p0.fwhm_s, pre1 = p0.center_s + period - 1.5 * p0.fwhm_s;
  if (pre1 > pre0 && train.pulses.size() == 1) {
    EchoWindow w{pre0, pre1, 0};
    checks["pre_echo_window_s"] = {pre0, pre1};
    checks["pre_echo_fraction"] =
        afc::detail::window_sum(res.intensity, res.time_start_s, res.time_step_s, w) * res.time_step_s /
        res.mode_energies.front();
  }
  json windows_json = json::array();
  for (const auto& w : windows) windows_json.push_back({{"start_s", w.start_s}, {"end_s", w.end_s}, {"mode", w.mode}});
  checks["echo_windows"] = windows_json;
  checks["input_energy"] = res.input_energy;

  const double t0 = std::max(0.0, p0.center_s - 3e-6), t1 = windows.back().end_s + 3e-6;
  f.write("trace.csv", trace_csv(res, t0, t1));
  f.write("plot.svg", trace_svg(res, t0, t1, "storage"));
  return {{"efficiencies", eff}, {"analytic", analytic}, {"checks", checks}};
}

inline json run_stark(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes) {
  const auto prof = build_profile(c);
  for (const auto& w : prof.warnings) notes.push_back(w);
  const auto train = config::pulse_train(c);
  const double spacing = c.profile.comb.spacing_hz;
  const auto match = matched_depth(c.cavity);
  const double d_real = comb_band_depth(prof.profile, c.profile.comb);
  std::vector<int> orders;
  std::vector<double> effs;
  json by_order = json::array(), s3 = json::array();
  EchoResult last;
  std::vector<EchoWindow> last_w;
  for (int n = 1; n <= c.stark.max_order; ++n) {
    const auto sched = schedule_for_order(n, spacing, c.stark.per_pulse_phase_rad);
    const auto w = echo_windows(train, spacing, n, c.analysis.window_half_width_s);
    auto res = simulate_stark_readout(prof.profile, c.cavity, train, sched, c.mode_matching, w, spacing);
    orders.push_back(n);
    effs.push_back(res.efficiencies.front());
    by_order.push_back({{"order", n}, {"efficiency", res.efficiencies.front()}});
    const double r2p = c.cavity.r2_effective();
    s3.push_back({{"order", n},
                  {"matched", c.mode_matching * stark_echo_efficiency(match.matched_depth, c.cavity.r1, r2p,
                                                                      c.profile.comb.finesse, n)},
                  {"realized",
                   c.mode_matching * stark_echo_efficiency(d_real, c.cavity.r1, r2p, c.profile.comb.finesse, n)}});
    last = std::move(res);
    last_w = w;
  }
  const auto fit = fit_echo_decay(orders, effs);
  double worst = 0.0;
  for (double r : fit.residuals) worst = std::max(worst, std::abs(r));
  const double rel = std::abs(fit.finesse - c.profile.comb.finesse) / c.profile.comb.finesse;
  json analytic = {
      {"stark_echo", s3},
      {"decay_fit",
       {{"slope_per_order_squared", fit.slope},
        {"intercept", fit.intercept},
        {"finesse", fit.finesse},
        {"residuals", fit.residuals}}},
      {"first_echo_matched",
       analytic_json(analytic_efficiency_from_ratio(c.mode_matching, c.profile.comb.finesse, match.loss_ratio))},
      {"matched_depth", match.matched_depth},
      {"effective_depth", d_real}};
  json checks = {{"fit_max_abs_residual", worst},
                 {"fit_finesse_relative_error", rel},
                 {"fit_finesse_within_2_percent", rel < 0.02},
                 {"warnings", notes}};
  const double t0 = last.time_start_s, t1 = last_w.back().end_s;
  f.write("trace.csv", trace_csv(last, t0, t1));
  f.write("plot.svg", trace_svg(last, t0, t1, "order " + std::to_string(c.stark.max_order)));
  return {{"efficiencies", {{"by_order", by_order}}}, {"analytic", analytic}, {"checks", checks}};
}

inline json run_qubit(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes) {
  const auto prof = build_profile(c);
  for (const auto& w : prof.warnings) notes.push_back(w);
  const auto& cb = c.profile.comb;
  const auto single = cavity_reflection(prof.profile, c.cavity);
  TimeBinSetup s{c.pulses.first_center_s, c.qubit.separation_s, c.qubit.fwhm_s, 1.0 / cb.spacing_hz};
  TimeBinReport rep;
  json analyzer;
  if (c.qubit.analyzer == "double_comb") {
    const double second = 1.0 / (1.0 / cb.spacing_hz + c.qubit.separation_s);
    CombSpec a = cb, b = cb;
    a.peak_depth = a.floor_depth + 0.5 * (cb.peak_depth - cb.floor_depth);
    b = a;
    b.spacing_hz = second;
    b.floor_depth = 0.0;
    const auto base = synthesize_profile(c.profile.features, c.profile.base_depth, c.grid).profile;
    auto respond = [&](double df) {
      return cavity_reflection(add_profiles(base, double_comb(a, b, df, c.grid).profile), c.cavity);
    };
    rep = analyze_double_comb(single, respond, second, c.mode_matching, s, c.qubit.phase_points);
    analyzer = {{"kind", "double_comb"}, {"spacings_hz", {cb.spacing_hz, second}}};
  } else {
    rep = analyze_two_path(single, c.mode_matching, s, c.qubit.phase_points);
    analyzer = {{"kind", "two_path"}, {"delay_s", c.qubit.separation_s}};
  }
  Pulse probe{s.first_center_s, s.fwhm_s, 1.0};
  double e_in = 0.0;
  const double dt = c.grid.time_step();
  for (std::size_t k = 0; k < c.grid.n_points; ++k) e_in += std::norm(probe.field(static_cast<double>(k) * dt));
  e_in *= dt;
  const double eta_e = rep.early.signal / e_in, eta_l = rep.late.signal / e_in, eta = 0.5 * (eta_e + eta_l);
  const auto lit = classical_bound(c.pulses.mean_photon_number, eta, MMinConvention::literal);
  const auto one = classical_bound(c.pulses.mean_photon_number, eta, MMinConvention::at_least_one);
  const auto& fd = rep.fidelity;
  json analytic = {
      {"fidelity",
       {{"early", fd.early},
        {"late", fd.late},
        {"plus", fd.plus},
        {"plus_i", fd.plus_i},
        {"poles", fd.poles},
        {"superpositions", fd.superpositions},
        {"total", fd.total}}},
      {"classical_bound",
       {{"mean_photon_number", c.pulses.mean_photon_number},
        {"efficiency", eta},
        {"literal", {{"m_min", lit.m_min}, {"fidelity", lit.fidelity}}},
        {"at_least_one", {{"m_min", one.m_min}, {"fidelity", one.fidelity}}}}},
      {"analyzer", analyzer}};
  json checks = {{"visibility_plus", rep.visibility_plus},
                 {"visibility_plus_i", rep.visibility_plus_i},
                 {"exceeds_classical_bound", fd.total > std::max(lit.fidelity, one.fidelity)},
                 {"warnings", notes}};

  std::ostringstream ic;
  ic << "phase_rad,intensity\n";
  for (std::size_t i = 0; i < rep.phases.size(); ++i) csv::row(ic, rep.phases[i], rep.interference[i]);
  f.write("interference.csv", ic.str());
  const double inv = 1.0 / std::numbers::sqrt2;
  PulseTrain train{{{s.first_center_s, s.fwhm_s, inv}, {s.first_center_s + s.separation_s, s.fwhm_s, inv}},
                   c.pulses.mean_photon_number};
  const auto res = simulate_storage(single, train, c.mode_matching, {});
  const double t0 = std::max(0.0, s.first_center_s - 2e-6);
  const double t1 = s.first_center_s + s.separation_s + s.storage_time_s + 2e-6;
  f.write("trace.csv", trace_csv(res, t0, t1));
  f.write("plot.svg", trace_svg(res, t0, t1, "|e> + |l>"));
  return {{"efficiencies", {{"early", eta_e}, {"late", eta_l}, {"mean", eta}}}, {"analytic", analytic}, {"checks", checks}};
}

inline json run_sweep(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes, unsigned threads) {
  SweepSetup s;
  s.grid = c.grid;
  s.cavity = c.cavity;
  s.eta_m = c.mode_matching;
  s.spacing_hz = c.sweep.spacing_hz;
  s.natural_depth = c.sweep.natural_depth;
  s.enhanced_depth = c.sweep.enhanced_depth;
  s.pit_width_hz = c.sweep.pit_width_hz;
  s.shape = c.profile.comb.shape;
  s.pulse_center_s = c.pulses.first_center_s;
  std::vector<SweepResult> all;
  json eff = json::object(), checks = json::object();
  std::vector<svg::Series> series;
  for (const auto& name : c.sweep.schemes) {
    auto r = sweep_bandwidth(bandwidth_scheme_from(name), c.sweep.bandwidths_hz, s, threads);
    json pts = json::array();
    for (std::size_t i = 0; i < r.values.size(); ++i)
      pts.push_back({{"bandwidth_hz", r.values[i]}, {"efficiency", r.efficiencies[i]}});
    eff[name] = pts;
    const auto [lo, hi] = std::minmax_element(r.efficiencies.begin(), r.efficiencies.end());
    const auto peak = std::distance(r.efficiencies.begin(), std::max_element(r.efficiencies.begin(), r.efficiencies.end()));
    checks[name] = {{"spread", *hi - *lo}, {"peak_bandwidth_hz", r.values[static_cast<std::size_t>(peak)]}};
    svg::Series sr{name, {}, r.efficiencies};
    for (double v : r.values) sr.x.push_back(v * 1e-6);
    series.push_back(std::move(sr));
    all.push_back(std::move(r));
  }
  checks["warnings"] = notes;
  json fwhm = json::array();
  for (double bw : c.sweep.bandwidths_hz) fwhm.push_back({{"bandwidth_hz", bw}, {"pulse_fwhm_s", sweep_pulse_fwhm(bw)}});
  json analytic = {{"matched_depth", matched_depth(c.cavity).matched_depth}, {"pulse_fwhm", fwhm}};
  std::ostringstream os;
  write_csv(os, all);
  f.write("sweep.csv", os.str());
  f.write("plot.svg", svg::line_plot(series, "comb bandwidth (MHz)", "efficiency"));
  return {{"efficiencies", eff}, {"analytic", analytic}, {"checks", checks}};
}

inline std::pair<HyperfineModel, PumpPlan> hyperfine_inputs(const config::HoleburnSpec& h) {
  HyperfineModel m;
  m.ground_splittings = {to_hz(h.ground_splittings_hz[0]), to_hz(h.ground_splittings_hz[1])};
  m.excited_splittings = {to_hz(h.excited_splittings_hz[0]), to_hz(h.excited_splittings_hz[1])};
  m.excited_half_below = h.excited_half_below;
  m.excited_five_half_above = h.excited_five_half_above;
  m.broadening = to_hz(h.broadening_hz);
  PumpPlan plan;
  for (const auto& ch : h.chirps_hz) plan.chirps.push_back({to_hz(ch[0]), to_hz(ch[1])});
  plan.target = {to_hz(h.target_hz[0]), to_hz(h.target_hz[1])};
  return {m, plan};
}

inline json run_holeburn(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes) {
  const auto [m, plan] = hyperfine_inputs(c.holeburn);
  const auto br = make_branching(c.holeburn.branching);
  const auto factors = apply_pump_plan(m, plan);
  const auto ratios = enhancement_ratios(factors, br, plan.target);
  json rj = json::array();
  for (const auto& r : ratios)
    rj.push_back({{"low_hz", static_cast<double>(r.lo)}, {"high_hz", static_cast<double>(r.hi)}, {"ratio", r.ratio}});
  json breaks = json::array();
  for (std::size_t i = 1; i < ratios.size(); ++i) breaks.push_back(static_cast<double>(ratios[i].lo));
  json offsets = json::array();
  const auto off = class_offsets(m);
  for (int x = 0; x < 9; ++x) offsets.push_back({{"transition", label(transition_of(x))}, {"offset_from_class_I_hz", off[0][x]}});
  std::ostringstream fs, rs, ps;
  write_csv(fs, factors);
  write_csv(rs, ratios);
  f.write("factors.csv", fs.str());
  f.write("ratios.csv", rs.str());

  const double g0 = c.grid.low_edge(), g1 = c.grid.high_edge();
  json profile_note = nullptr;
  if (c.grid.contains(static_cast<double>(plan.target.lo), static_cast<double>(plan.target.hi))) {
    const auto enhanced = enhance_profile(flat_profile(c.grid, c.profile.base_depth), ratios, plan.target);
    write_csv(ps, enhanced);
    f.write("profile.csv", ps.str());
    svg::Series s{"enhanced absorption", {}, {}};
    for (std::size_t k = 0; k < c.grid.n_points; k += 8) {
      const double nu = c.grid.frequency(k);
      if (nu < static_cast<double>(plan.target.lo) - 5e6 || nu > static_cast<double>(plan.target.hi) + 5e6) continue;
      s.x.push_back(nu * 1e-6);
      s.y.push_back(enhanced.depth[k]);
    }
    f.write("plot.svg", svg::line_plot({s}, "frequency (MHz)", "optical depth"));
  } else {
    std::ostringstream os;
    os << "target band lies outside the grid [" << g0 << ", " << g1 << "] Hz; no profile written";
    notes.push_back(os.str());
  }
  bool covered = true;
  for (const auto& segs : factors.segments)
    covered &= !segs.empty() && segs.front().lo == plan.target.lo && segs.back().hi == plan.target.hi;
  json checks = {{"factor_maps_cover_target", covered}, {"warnings", notes}};
  return {{"efficiencies", json::object()},
          {"analytic", {{"ratios", rj}, {"breakpoints_hz", breaks}, {"class_I_offsets", offsets}}},
          {"checks", checks}};
}

inline json run_analytics(const ScenarioConfig& c, const Files& f, std::vector<std::string> notes) {
  const auto an = cavity_analytics(c.cavity);
  const auto match = matched_depth(c.cavity, c.profile.comb.peak_depth, c.profile.comb.shape, c.mode_matching);
  const auto eq1 = analytic_efficiency_from_ratio(c.mode_matching, c.profile.comb.finesse, match.loss_ratio);
  const auto rt = resonance_rt(c.cavity.r1, c.cavity.r2, c.cavity.d_loss, 0.0, c.mode_matching);
  json analytic = {
      {"cavity", {{"finesse", an.finesse}, {"fsr_hz", an.fsr_hz}, {"linewidth_hz", an.linewidth_hz}}},
      {"impedance_matching",
       {{"matched_depth", match.matched_depth},
        {"epsilon", match.epsilon},
        {"loss_ratio", match.loss_ratio},
        {"inverse_loss_ratio", 1.0 / match.loss_ratio},
        {"implied_finesse", match.implied_finesse}}},
      {"efficiency", analytic_json(eq1)},
      {"off_absorption_resonance", {{"reflectivity", rt.reflectivity}, {"transmissivity", rt.transmissivity}}},
      {"mode_optics", nullptr}};
  if (c.mode_optics) {
    const auto& mo = *c.mode_optics;
    const auto gm = gaussian_mode(c.cavity.wavelength_m, mo.membrane_thickness_m, c.cavity.refractive_index,
                                  mo.air_gap_m, mo.mirror_roc_m);
    analytic["mode_optics"] = {{"effective_length_m", gm.effective_length_m},
                               {"waist_m", gm.waist_m},
                               {"fiber_waist_m", mo.fiber_waist_m},
                               {"mode_matching", mode_match(gm.waist_m, mo.fiber_waist_m)}};
  }
  const auto prof = build_profile(c);
  for (const auto& w : prof.warnings) notes.push_back(w);
  const auto& cb = c.profile.comb;
  const double c0 = c.grid.center_offset_hz;
  std::optional<std::pair<double, double>> pit;
  for (const auto& ft : c.profile.features)
    if (ft.kind == FeatureKind::pit && ft.low_hz <= c0 && c0 <= ft.high_hz) pit = std::pair{ft.low_hz, ft.high_hz};
  const auto dr = dispersion_diagnostics(prof.profile, c0 - 0.5 * cb.bandwidth_hz, c0 + 0.5 * cb.bandwidth_hz,
                                         cb.spacing_hz, pit);
  analytic["dispersion"] = {{"slope_rad_per_hz", dr.slope_rad_per_hz},
                            {"period_swing_rad", dr.period_swing_rad},
                            {"relative_drift", dr.relative_drift},
                            {"effective_depth", dr.effective_depth},
                            {"pit_depth", config::detail::opt_json(dr.pit_depth)},
                            {"residual", config::detail::opt_json(dr.residual)}};
  const auto resp = cavity_reflection(prof.profile, c.cavity);
  double mx = 0.0;
  for (const auto& a : resp.amplitude) mx = std::max(mx, std::norm(a));
  std::ostringstream ps, rs;
  write_csv(ps, prof.profile);
  write_csv(rs, resp);
  f.write("profile.csv", ps.str());
  f.write("response.csv", rs.str());
  svg::Series s{"|r|^2", {}, {}}, d{"depth / max", {}, {}};
  const double dmax = *std::max_element(prof.profile.depth.begin(), prof.profile.depth.end());
  for (std::size_t k = 0; k < c.grid.n_points; ++k) {
    const double nu = c.grid.frequency(k);
    if (std::abs(nu - c0) > cb.bandwidth_hz) continue;
    s.x.push_back(nu * 1e-6);
    s.y.push_back(std::norm(resp.amplitude[k]));
    d.x.push_back(nu * 1e-6);
    d.y.push_back(dmax > 0.0 ? prof.profile.depth[k] / dmax : 0.0);
  }
  f.write("plot.svg", svg::line_plot({s, d}, "frequency (MHz)", "reflectance"));
  json checks = {{"max_reflectance", mx}, {"passive", mx <= 1.0 + 1e-12}, {"warnings", notes}};
  return {{"efficiencies", {{"analytic", eq1.efficiency}}}, {"analytic", analytic}, {"checks", checks}};
}

inline json run_fit(const ScenarioConfig& c, const Files&, std::vector<std::string> notes) {
  json analytic = {{"loss", nullptr}, {"mode_matching", nullptr}};
  json checks = json::object();
  if (c.fit.measured_reflectivity) {
    const auto lf = infer_loss(*c.fit.measured_reflectivity, c.cavity.r1, c.cavity.r2, c.mode_matching);
    const auto back = resonance_rt(c.cavity.r1, c.cavity.r2, lf.d_loss, 0.0, c.mode_matching).reflectivity;
    analytic["loss"] = {{"d_loss", lf.d_loss}, {"epsilon", lf.epsilon}, {"epsilon_ppm", lf.epsilon * 1e6}};
    checks["reflectivity_roundtrip_error"] = std::abs(back - *c.fit.measured_reflectivity);
  }
  if (c.fit.matched_reflectivity) analytic["mode_matching"] = infer_mode_matching(*c.fit.matched_reflectivity);
  checks["warnings"] = notes;
  return {{"efficiencies", json::object()}, {"analytic", analytic}, {"checks", checks}};
}

}  // namespace detail

/// Runs one scenario, writing its artifacts and result.json into the output directory.
inline RunOutcome run(ScenarioConfig c, const RunOptions& opt = {}) {
  auto notes = apply_overrides(c, opt);
  if (auto issues = config::validate(c); !issues.empty()) throw config::ConfigError(std::move(issues));
  RunOutcome out;
  const std::filesystem::path dir = c.output_dir;
  std::filesystem::create_directories(dir);
  const detail::Files files{dir, &out.files};
  json body;
  if (c.scenario == "storage") body = detail::run_storage(c, files, notes);
  else if (c.scenario == "stark_readout") body = detail::run_stark(c, files, notes);
  else if (c.scenario == "qubit") body = detail::run_qubit(c, files, notes);
  else if (c.scenario == "sweep") body = detail::run_sweep(c, files, notes, opt.threads);
  else if (c.scenario == "holeburn") body = detail::run_holeburn(c, files, notes);
  else if (c.scenario == "analytics") body = detail::run_analytics(c, files, notes);
  else body = detail::run_fit(c, files, notes);
  out.result = {{"scenario", c.scenario},
                {"inputs", config::to_json(c)},
                {"efficiencies", body["efficiencies"]},
                {"analytic", body["analytic"]},
                {"checks", body["checks"]}};
  files.write("result.json", out.result.dump(2) + "\n");
  return out;
}

// ------------------------------------------------------------------ report

namespace detail {

inline std::string num(const json& v, int digits = 4) {
  if (!v.is_number()) return "n/a";
  std::ostringstream os;
  os.precision(digits);
  os << v.get<double>();
  return os.str();
}

inline void rows_for(std::ostringstream& os, const std::string& run, const json& r) {
  const std::string kind = r.value("scenario", "?");
  const auto& e = r["efficiencies"];
  const auto& a = r["analytic"];
  auto row = [&](const std::string& q, const std::string& sim, const std::string& ana) {
    os << "| " << run << " | " << kind << " | " << q << " | " << sim << " | " << ana << " |\n";
  };
  if (kind == "storage") {
    row("mean efficiency", num(e["mean"]), num(a["matched"]["efficiency"]));
    if (e["per_mode"].size() > 1) row("per-mode spread", num(e["spread"]), "0");
    if (e["with_afc_lifetime"].is_object()) row("mean with AFC lifetime", num(e["with_afc_lifetime"]["mean"]), "n/a");
  } else if (kind == "stark_readout") {
    for (std::size_t i = 0; i < e["by_order"].size(); ++i)
      row("echo order " + std::to_string(i + 1), num(e["by_order"][i]["efficiency"]),
          num(a["stark_echo"][i]["matched"]));
    row("fitted finesse", num(a["decay_fit"]["finesse"]), num(r["inputs"]["profile"]["comb"]["finesse"]));
  } else if (kind == "qubit") {
    row("total fidelity", num(a["fidelity"]["total"]), "n/a");
    row("classical bound (at_least_one)", "n/a", num(a["classical_bound"]["at_least_one"]["fidelity"]));
    row("classical bound (literal)", "n/a", num(a["classical_bound"]["literal"]["fidelity"]));
    row("mean efficiency", num(e["mean"]), "n/a");
  } else if (kind == "sweep") {
    for (const auto& [name, pts] : e.items()) {
      std::string vals;
      for (const auto& p : pts) vals += (vals.empty() ? "" : " ") + num(p["efficiency"], 3);
      row(name, vals, "n/a");
    }
  } else if (kind == "holeburn") {
    for (const auto& s : a["ratios"])
      row("ratio [" + num(s["low_hz"], 6) + ", " + num(s["high_hz"], 6) + "] Hz", "n/a", num(s["ratio"]));
  } else if (kind == "analytics") {
    row("cavity finesse", "n/a", num(a["cavity"]["finesse"]));
    row("FSR (Hz)", "n/a", num(a["cavity"]["fsr_hz"]));
    row("linewidth (Hz)", "n/a", num(a["cavity"]["linewidth_hz"]));
    row("4 d~/epsilon", "n/a", num(a["impedance_matching"]["inverse_loss_ratio"]));
    row("efficiency", "n/a", num(a["efficiency"]["efficiency"]));
  } else if (kind == "fit") {
    if (a["loss"].is_object()) row("epsilon (ppm)", "n/a", num(a["loss"]["epsilon_ppm"]));
    if (a["mode_matching"].is_number()) row("mode matching", "n/a", num(a["mode_matching"]));
  }
}

}  // namespace detail

/// Markdown summary of every result.json below `dir`; empty when there are none.
inline std::string report(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> found;
  if (std::filesystem::exists(dir))
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().filename() == "result.json") found.push_back(e.path());
  if (found.empty()) return "";
  std::sort(found.begin(), found.end());
  std::ostringstream table, checks;
  table << "| run | scenario | quantity | simulated | analytic |\n|---|---|---|---|---|\n";
  for (const auto& p : found) {
    std::ifstream is(p);
    const json r = json::parse(is);
    auto run = std::filesystem::relative(p.parent_path(), dir).generic_string();
    if (run.empty() || run == ".") run = p.parent_path().filename().generic_string();
    detail::rows_for(table, run, r);
    checks << "\n### " << run << "\n";
    for (const auto& [k, v] : r["checks"].items()) {
      if (k == "warnings") {
        for (const auto& w : v) checks << "- warning: " << w.get<std::string>() << "\n";
      } else if (v.is_boolean()) {
        checks << "- " << k << ": " << (v.get<bool>() ? "pass" : "FAIL") << "\n";
      } else if (v.is_number()) {
        checks << "- " << k << ": " << detail::num(v, 6) << "\n";
      }
    }
  }
  return table.str() + "\n## Checks\n" + checks.str();
}

}  // namespace afc::scenario
