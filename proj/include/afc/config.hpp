#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "afc/ions.hpp"
#include "afc/memory.hpp"
#include "afc/optimize.hpp"
#include "afc/response.hpp"
#include "afc/spectral.hpp"

namespace afc::config {

using json = nlohmann::json;

struct Issue {
  std::string path;
  std::string message;
  std::string hint;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Issue> issues) : std::runtime_error(summary(issues)), issues_(std::move(issues)) {}
  const std::vector<Issue>& issues() const { return issues_; }

  static std::string summary(const std::vector<Issue>& issues) {
    std::ostringstream os;
    for (const auto& i : issues) os << i.path << ": " << i.message << (i.hint.empty() ? "" : " (" + i.hint + ")") << '\n';
    return os.str();
  }

 private:
  std::vector<Issue> issues_;
};

inline const std::vector<std::string>& scenario_kinds() {
  static const std::vector<std::string> k{"storage", "stark_readout", "qubit", "sweep", "holeburn", "analytics", "fit"};
  return k;
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> p{"wgc", "fbc"};
  return p;
}

struct ProfileSpec {
  double base_depth = 0.97;
  std::vector<SpectralFeature> features;
  CombSpec comb;
  std::optional<int> carved_teeth;
};

struct ModeOptics {
  double membrane_thickness_m = 0.0;
  double air_gap_m = 0.0;
  double mirror_roc_m = 0.0;
  double fiber_waist_m = 0.0;
};

struct PulseSpec {
  double fwhm_s = 0.45e-6;
  double first_center_s = 10e-6;
  int count = 1;
  double spacing_s = 0.6e-6;
  double mean_photon_number = 0.35;
};

struct AnalysisSpec {
  int echo_order = 1;
  std::optional<double> window_half_width_s;
  std::optional<double> afc_lifetime_s;
};

struct StarkSpec {
  int max_order = 5;
  double per_pulse_phase_rad = std::numbers::pi;
};

struct QubitSpec {
  std::string analyzer = "two_path";  // two_path | double_comb
  double fwhm_s = 0.19e-6;
  double separation_s = 0.52e-6;
  int phase_points = 16;
};

struct SweepSpec {
  std::vector<std::string> schemes{"enhanced", "natural_same_crystal", "natural_high_absorption"};
  std::vector<double> bandwidths_hz{2e6, 3e6, 4e6, 5e6, 6e6, 7e6};
  double spacing_hz = 1e6;
  double natural_depth = 0.97;
  double enhanced_depth = 2.6;
  double pit_width_hz = 20e6;
};

struct HoleburnSpec {
  std::array<double, 2> ground_splittings_hz{34.5e6, 46.2e6};
  std::array<double, 2> excited_splittings_hz{75e6, 102e6};
  bool excited_half_below = true;
  bool excited_five_half_above = true;
  double broadening_hz = 102e6;
  std::vector<std::array<double, 2>> chirps_hz{{0.0, 46.2e6}, {55.8e6, 102e6}};
  std::array<double, 2> target_hz{46.2e6, 55.8e6};
  std::array<std::array<double, 3>, 3> branching = BranchingTable{}.value;
};

struct FitSpec {
  std::optional<double> measured_reflectivity;
  std::optional<double> matched_reflectivity;
};

struct ScenarioConfig {
  std::string scenario = "storage";
  std::optional<std::string> preset;
  std::string output_dir = "afc-out";
  FrequencyGrid grid;
  ProfileSpec profile;
  CavityParams cavity;
  double mode_matching = 1.0;
  std::optional<ModeOptics> mode_optics;
  PulseSpec pulses;
  AnalysisSpec analysis;
  StarkSpec stark;
  QubitSpec qubit;
  SweepSpec sweep;
  HoleburnSpec holeburn;
  FitSpec fit;
};

// ---------------------------------------------------------------- serialization

namespace detail {

template <class T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace detail

inline json to_json(const ScenarioConfig& c) {
  json features = json::array();
  for (const auto& f : c.profile.features)
    features.push_back({{"kind", to_string(f.kind)}, {"low_hz", f.low_hz}, {"high_hz", f.high_hz}, {"depth", f.depth}});
  const auto& cb = c.profile.comb;
  json chirps = json::array();
  for (const auto& ch : c.holeburn.chirps_hz) chirps.push_back({ch[0], ch[1]});
  json j = {
      {"scenario", c.scenario},
      {"preset", detail::opt_json(c.preset)},
      {"output_dir", c.output_dir},
      {"grid", {{"span_hz", c.grid.span_hz}, {"n_points", c.grid.n_points}, {"center_offset_hz", c.grid.center_offset_hz}}},
      {"profile",
       {{"base_depth", c.profile.base_depth},
        {"features", features},
        {"comb",
         {{"spacing_hz", cb.spacing_hz},
          {"finesse", cb.finesse},
          {"bandwidth_hz", cb.bandwidth_hz},
          {"peak_depth", cb.peak_depth},
          {"tooth_shape", to_string(cb.shape)},
          {"floor_depth", cb.floor_depth}}},
        {"carved_teeth", detail::opt_json(c.profile.carved_teeth)}}},
      {"cavity",
       {{"r1", c.cavity.r1},
        {"r2", c.cavity.r2},
        {"d_loss", c.cavity.d_loss},
        {"geometric_length_m", c.cavity.geometric_length_m},
        {"refractive_index", c.cavity.refractive_index},
        {"air_gap_m", c.cavity.air_gap_m},
        {"length_detuning_m", c.cavity.length_detuning_m},
        {"wavelength_m", c.cavity.wavelength_m}}},
      {"mode_matching", c.mode_matching},
      {"mode_optics", nullptr},
      {"pulses",
       {{"fwhm_s", c.pulses.fwhm_s},
        {"first_center_s", c.pulses.first_center_s},
        {"count", c.pulses.count},
        {"spacing_s", c.pulses.spacing_s},
        {"mean_photon_number", c.pulses.mean_photon_number}}},
      {"analysis",
       {{"echo_order", c.analysis.echo_order},
        {"window_half_width_s", detail::opt_json(c.analysis.window_half_width_s)},
        {"afc_lifetime_s", detail::opt_json(c.analysis.afc_lifetime_s)}}},
      {"stark", {{"max_order", c.stark.max_order}, {"per_pulse_phase_rad", c.stark.per_pulse_phase_rad}}},
      {"qubit",
       {{"analyzer", c.qubit.analyzer},
        {"fwhm_s", c.qubit.fwhm_s},
        {"separation_s", c.qubit.separation_s},
        {"phase_points", c.qubit.phase_points}}},
      {"sweep",
       {{"schemes", c.sweep.schemes},
        {"bandwidths_hz", c.sweep.bandwidths_hz},
        {"spacing_hz", c.sweep.spacing_hz},
        {"natural_depth", c.sweep.natural_depth},
        {"enhanced_depth", c.sweep.enhanced_depth},
        {"pit_width_hz", c.sweep.pit_width_hz}}},
      {"holeburn",
       {{"ground_splittings_hz", c.holeburn.ground_splittings_hz},
        {"excited_splittings_hz", c.holeburn.excited_splittings_hz},
        {"excited_half_below", c.holeburn.excited_half_below},
        {"excited_five_half_above", c.holeburn.excited_five_half_above},
        {"broadening_hz", c.holeburn.broadening_hz},
        {"chirps_hz", chirps},
        {"target_hz", c.holeburn.target_hz},
        {"branching", c.holeburn.branching}}},
      {"fit",
       {{"measured_reflectivity", detail::opt_json(c.fit.measured_reflectivity)},
        {"matched_reflectivity", detail::opt_json(c.fit.matched_reflectivity)}}},
  };
  if (c.mode_optics)
    j["mode_optics"] = {{"membrane_thickness_m", c.mode_optics->membrane_thickness_m},
                        {"air_gap_m", c.mode_optics->air_gap_m},
                        {"mirror_roc_m", c.mode_optics->mirror_roc_m},
                        {"fiber_waist_m", c.mode_optics->fiber_waist_m}};
  return j;
}

namespace detail {

// Reads one JSON object, recording every problem instead of stopping at the first.
class Reader {
 public:
  Reader(const json* j, std::string path, std::vector<Issue>* issues)
      : j_(j), path_(std::move(path)), issues_(issues) {
    if (j_ && !j_->is_object()) {
      fail(path_, "expected an object", "");
      j_ = nullptr;
    }
  }

  ~Reader() {
    if (!j_) return;
    for (const auto& [k, v] : j_->items())
      if (!seen_.count(k)) fail(at(k), "unknown field", "remove it or check the spelling");
  }

  Reader(const Reader&) = delete;
  Reader& operator=(const Reader&) = delete;

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  template <class T>
  void req(const char* key, T& out) {
    if (const json* v = find(key)) {
      if (!v->is_null()) {
        take(key, *v, out);
        return;
      }
    }
    fail(at(key), "missing required field", "set it explicitly or start from a preset");
  }

  template <class T>
  void opt(const char* key, std::optional<T>& out) {
    const json* v = find(key);
    if (!v || v->is_null()) {
      out.reset();
      return;
    }
    T tmp{};
    if (take(key, *v, tmp)) out = tmp;
  }

  const json* child(const char* key) {
    const json* v = find(key);
    return v && !v->is_null() ? v : nullptr;
  }

  void fail(const std::string& path, const std::string& message, const std::string& hint) {
    issues_->push_back({path, message, hint});
  }

 private:
  const json* find(const char* key) {
    seen_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  template <class T>
  bool take(const char* key, const json& v, T& out) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw std::invalid_argument("expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer()) throw std::invalid_argument("expected an integer");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::invalid_argument("expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::invalid_argument("expected a string");
      }
      out = v.get<T>();
      return true;
    } catch (const std::exception& e) {
      fail(at(key), e.what(), "");
      return false;
    }
  }

  const json* j_;
  std::string path_;
  std::vector<Issue>* issues_;
  std::set<std::string> seen_;
};

template <class E, class F>
void parse_enum(Reader& r, const char* key, E& out, F from) {
  const auto before = r.at(key);
  std::optional<std::string> v;
  r.opt(key, v);
  if (!v) {
    r.fail(before, "missing required field", "");
    return;
  }
  try {
    out = from(*v);
  } catch (const std::exception& e) {
    r.fail(before, e.what(), "");
  }
}

}  // namespace detail

/// Fully populated device parameters; only the scenario kind and output directory are left to the caller.
inline json preset(const std::string& name) {
  ScenarioConfig c;
  c.preset = name;
  c.grid = FrequencyGrid{200e6, 1u << 15, 51e6};
  c.profile.features = {{FeatureKind::pit, 44e6, 58e6, 0.0}};
  c.sweep.pit_width_hz = 20e6;
  if (name == "wgc") {
    c.profile.base_depth = 0.97;
    c.profile.comb = CombSpec{1e6, 12.0, 6e6, 2.6, ToothShape::gaussian, 0.0};
    c.cavity = CavityParams{0.65, 0.995, 0.012, 4.9e-3, 1.8, 0.0, 0.0, 580e-9};
    c.mode_matching = 0.985;
    c.pulses = PulseSpec{0.45e-6, 10e-6, 1, 0.6e-6, 0.35};
    c.qubit = QubitSpec{"double_comb", 0.26e-6, 0.5e-6, 12};
    c.fit.matched_reflectivity = 1.0 - 0.985;
  } else if (name == "fbc") {
    c.profile.base_depth = 0.052;
    c.profile.comb = CombSpec{0.5e6, 8.0, 6e6, 0.14, ToothShape::gaussian, 0.0};
    c.cavity = CavityParams{0.965, 0.999, 0.00034, 200e-6, 1.8, 100e-6, 0.0, 580e-9};
    c.mode_matching = 0.95;
    c.mode_optics = ModeOptics{200e-6, 100e-6, 820e-6, 7.95e-6};
    c.pulses = PulseSpec{0.19e-6, 10e-6, 1, 0.6e-6, 0.7};
    c.qubit = QubitSpec{"two_path", 0.19e-6, 0.52e-6, 16};
    c.fit.measured_reflectivity = 0.841;
    c.sweep.spacing_hz = 0.5e6;
    c.sweep.natural_depth = 0.052;
    c.sweep.enhanced_depth = 0.14;
  } else {
    throw ConfigError({{"preset", "unknown preset '" + name + "'", "use wgc or fbc"}});
  }
  return to_json(c);
}

/// Parses a document; a "preset" key pulls in that preset first and the document's fields override it.
inline ScenarioConfig from_json(const json& doc) {
  std::vector<Issue> issues;
  if (!doc.is_object()) throw ConfigError({{"", "configuration must be a JSON object", ""}});
  json j = doc;
  if (auto it = doc.find("preset"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ConfigError({{"preset", "expected a string", "use wgc or fbc"}});
    j = preset(it->get<std::string>());
    j.merge_patch(doc);
    j["preset"] = *it;
  }

  ScenarioConfig c;
  {
    detail::Reader r(&j, "", &issues);
    r.req("scenario", c.scenario);
    r.opt("preset", c.preset);
    r.req("output_dir", c.output_dir);
    r.req("mode_matching", c.mode_matching);
    {
      detail::Reader g(r.child("grid"), "grid", &issues);
      if (!r.child("grid")) issues.push_back({"grid", "missing required section", "start from a preset"});
      g.req("span_hz", c.grid.span_hz);
      g.req("n_points", c.grid.n_points);
      g.req("center_offset_hz", c.grid.center_offset_hz);
    }
    {
      const json* pj = r.child("profile");
      if (!pj) issues.push_back({"profile", "missing required section", "start from a preset"});
      detail::Reader p(pj, "profile", &issues);
      p.req("base_depth", c.profile.base_depth);
      p.opt("carved_teeth", c.profile.carved_teeth);
      c.profile.features.clear();
      if (const json* fs = p.child("features")) {
        if (!fs->is_array()) {
          issues.push_back({"profile.features", "expected an array", ""});
        } else {
          for (std::size_t i = 0; i < fs->size(); ++i) {
            SpectralFeature f;
            detail::Reader fr(&(*fs)[i], "profile.features[" + std::to_string(i) + "]", &issues);
            detail::parse_enum(fr, "kind", f.kind, feature_kind_from);
            fr.req("low_hz", f.low_hz);
            fr.req("high_hz", f.high_hz);
            fr.req("depth", f.depth);
            c.profile.features.push_back(f);
          }
        }
      }
      const json* cj = p.child("comb");
      if (!cj) issues.push_back({"profile.comb", "missing required section", ""});
      detail::Reader cr(cj, "profile.comb", &issues);
      auto& cb = c.profile.comb;
      cr.req("spacing_hz", cb.spacing_hz);
      cr.req("finesse", cb.finesse);
      cr.req("bandwidth_hz", cb.bandwidth_hz);
      cr.req("peak_depth", cb.peak_depth);
      detail::parse_enum(cr, "tooth_shape", cb.shape, tooth_shape_from);
      cr.req("floor_depth", cb.floor_depth);
    }
    {
      detail::Reader cv(r.child("cavity"), "cavity", &issues);
      if (!r.child("cavity")) issues.push_back({"cavity", "missing required section", "start from a preset"});
      cv.req("r1", c.cavity.r1);
      cv.req("r2", c.cavity.r2);
      cv.req("d_loss", c.cavity.d_loss);
      cv.req("geometric_length_m", c.cavity.geometric_length_m);
      cv.req("refractive_index", c.cavity.refractive_index);
      cv.req("air_gap_m", c.cavity.air_gap_m);
      cv.req("length_detuning_m", c.cavity.length_detuning_m);
      cv.req("wavelength_m", c.cavity.wavelength_m);
    }
    if (const json* mo = r.child("mode_optics")) {
      ModeOptics m;
      detail::Reader mr(mo, "mode_optics", &issues);
      mr.req("membrane_thickness_m", m.membrane_thickness_m);
      mr.req("air_gap_m", m.air_gap_m);
      mr.req("mirror_roc_m", m.mirror_roc_m);
      mr.req("fiber_waist_m", m.fiber_waist_m);
      c.mode_optics = m;
    }
    {
      detail::Reader pu(r.child("pulses"), "pulses", &issues);
      if (!r.child("pulses")) issues.push_back({"pulses", "missing required section", "start from a preset"});
      pu.req("fwhm_s", c.pulses.fwhm_s);
      pu.req("first_center_s", c.pulses.first_center_s);
      pu.req("count", c.pulses.count);
      pu.req("spacing_s", c.pulses.spacing_s);
      pu.req("mean_photon_number", c.pulses.mean_photon_number);
    }
    if (const json* a = r.child("analysis")) {
      detail::Reader ar(a, "analysis", &issues);
      ar.req("echo_order", c.analysis.echo_order);
      ar.opt("window_half_width_s", c.analysis.window_half_width_s);
      ar.opt("afc_lifetime_s", c.analysis.afc_lifetime_s);
    }
    if (const json* s = r.child("stark")) {
      detail::Reader sr(s, "stark", &issues);
      sr.req("max_order", c.stark.max_order);
      sr.req("per_pulse_phase_rad", c.stark.per_pulse_phase_rad);
    }
    if (const json* q = r.child("qubit")) {
      detail::Reader qr(q, "qubit", &issues);
      qr.req("analyzer", c.qubit.analyzer);
      qr.req("fwhm_s", c.qubit.fwhm_s);
      qr.req("separation_s", c.qubit.separation_s);
      qr.req("phase_points", c.qubit.phase_points);
    }
    if (const json* s = r.child("sweep")) {
      detail::Reader sr(s, "sweep", &issues);
      sr.req("schemes", c.sweep.schemes);
      sr.req("bandwidths_hz", c.sweep.bandwidths_hz);
      sr.req("spacing_hz", c.sweep.spacing_hz);
      sr.req("natural_depth", c.sweep.natural_depth);
      sr.req("enhanced_depth", c.sweep.enhanced_depth);
      sr.req("pit_width_hz", c.sweep.pit_width_hz);
    }
    if (const json* h = r.child("holeburn")) {
      detail::Reader hr(h, "holeburn", &issues);
      hr.req("ground_splittings_hz", c.holeburn.ground_splittings_hz);
      hr.req("excited_splittings_hz", c.holeburn.excited_splittings_hz);
      hr.req("excited_half_below", c.holeburn.excited_half_below);
      hr.req("excited_five_half_above", c.holeburn.excited_five_half_above);
      hr.req("broadening_hz", c.holeburn.broadening_hz);
      hr.req("chirps_hz", c.holeburn.chirps_hz);
      hr.req("target_hz", c.holeburn.target_hz);
      hr.req("branching", c.holeburn.branching);
    }
    if (const json* f = r.child("fit")) {
      detail::Reader fr(f, "fit", &issues);
      fr.opt("measured_reflectivity", c.fit.measured_reflectivity);
      fr.opt("matched_reflectivity", c.fit.matched_reflectivity);
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

// ---------------------------------------------------------------- validation

/// Pulse train described by the config; multimode trains are spaced by pulses.spacing_s.
inline PulseTrain pulse_train(const ScenarioConfig& c) {
  PulseTrain t;
  t.mean_photon_number = c.pulses.mean_photon_number;
  for (int i = 0; i < c.pulses.count; ++i)
    t.pulses.push_back({c.pulses.first_center_s + i * c.pulses.spacing_s, c.pulses.fwhm_s, 1.0});
  return t;
}

namespace detail {

inline void check_range(std::vector<Issue>& out, const std::string& path, double v, double lo, double hi,
                        const std::string& hint) {
  if (!(v >= lo && v <= hi)) {
    std::ostringstream os;
    os << "value " << v << " lies outside [" << lo << ", " << hi << "]";
    out.push_back({path, os.str(), hint});
  }
}

inline void check_positive(std::vector<Issue>& out, const std::string& path, double v, const std::string& hint) {
  if (!(v > 0.0)) out.push_back({path, "must be positive", hint});
}

}  // namespace detail

/// Cross-field checks; an empty result means the config can run.
inline std::vector<Issue> validate(const ScenarioConfig& c) {
  std::vector<Issue> out;
  using detail::check_positive;
  using detail::check_range;
  bool known = false;
  for (const auto& k : scenario_kinds()) known |= k == c.scenario;
  if (!known) out.push_back({"scenario", "unknown scenario kind '" + c.scenario + "'",
                             "use storage, stark_readout, qubit, sweep, holeburn, analytics or fit"});
  if (c.output_dir.empty()) out.push_back({"output_dir", "must not be empty", ""});

  const auto& g = c.grid;
  bool grid_ok = true;
  if (!is_power_of_two(g.n_points) || g.n_points < 4096) {
    out.push_back({"grid.n_points", "must be a power of two and at least 4096", "try 32768"});
    grid_ok = false;
  }
  if (!(g.span_hz > 0.0)) {
    out.push_back({"grid.span_hz", "must be positive", "200 MHz covers the preset profiles"});
    grid_ok = false;
  }
  if (grid_ok && g.resolution() > max_echo_resolution_hz) {
    std::ostringstream os;
    os << "resolution " << g.resolution() << " Hz is coarser than " << max_echo_resolution_hz << " Hz";
    out.push_back({"grid.n_points", os.str(), "raise n_points or reduce span_hz"});
  }

  const auto& p = c.profile;
  check_range(out, "profile.base_depth", p.base_depth, 0.0, 1e3, "depths are optical depths, not percentages");
  double widest = 0.0;
  for (std::size_t i = 0; i < p.features.size(); ++i) {
    const auto& f = p.features[i];
    const std::string at = "profile.features[" + std::to_string(i) + "]";
    if (!(f.high_hz > f.low_hz)) out.push_back({at + ".high_hz", "must exceed low_hz", ""});
    if (!(f.depth >= 0.0)) out.push_back({at + ".depth", "must be non-negative", ""});
    if (grid_ok && !g.contains(f.low_hz, f.high_hz))
      out.push_back({at, "feature lies outside the frequency grid", "move it or widen grid.span_hz"});
    widest = std::max(widest, f.high_hz - f.low_hz);
  }
  if (grid_ok && g.span_hz < 10.0 * widest) {
    std::ostringstream os;
    os << "span " << g.span_hz << " Hz is less than ten times the widest feature (" << widest << " Hz)";
    out.push_back({"grid.span_hz", os.str(), "widen the grid so the phase transform sees flat edges"});
  }

  const auto& cb = p.comb;
  check_positive(out, "profile.comb.spacing_hz", cb.spacing_hz, "");
  if (!(cb.finesse > 1.0)) out.push_back({"profile.comb.finesse", "must exceed 1", ""});
  if (!(cb.floor_depth >= 0.0)) out.push_back({"profile.comb.floor_depth", "must be non-negative", ""});
  if (!(cb.peak_depth >= cb.floor_depth)) out.push_back({"profile.comb.peak_depth", "must be at least floor_depth", ""});
  if (cb.spacing_hz > 0.0 && cb.bandwidth_hz < cb.spacing_hz)
    out.push_back({"profile.comb.bandwidth_hz", "must be at least one spacing", ""});
  if (p.carved_teeth && cb.spacing_hz > 0.0 && cb.bandwidth_hz >= cb.spacing_hz) {
    const int n = cb.n_teeth(), k = *p.carved_teeth;
    if (k < 1 || k > n || (n - k) % 2 != 0)
      out.push_back({"profile.carved_teeth", "must lie in [1, " + std::to_string(n) + "] with the parity of the tooth count",
                     ""});
  }
  const double c0 = g.center_offset_hz;
  const double comb_lo = c0 - 0.5 * cb.bandwidth_hz, comb_hi = c0 + 0.5 * cb.bandwidth_hz;
  for (std::size_t i = 0; i < p.features.size(); ++i) {
    const auto& f = p.features[i];
    if (f.kind != FeatureKind::pit) continue;
    if (f.low_hz <= c0 && c0 <= f.high_hz && (comb_lo < f.low_hz || comb_hi > f.high_hz)) {
      std::ostringstream os;
      os << "comb band [" << comb_lo << ", " << comb_hi << "] Hz does not fit inside the pit at profile.features[" << i
         << "] ([" << f.low_hz << ", " << f.high_hz << "] Hz)";
      out.push_back({"profile.comb.bandwidth_hz", os.str(), "narrow the comb or widen the pit"});
    }
  }

  const auto& cv = c.cavity;
  check_range(out, "cavity.r1", cv.r1, 0.0, 1.0, "reflectivities are fractions");
  check_range(out, "cavity.r2", cv.r2, 0.0, 1.0, "reflectivities are fractions");
  check_range(out, "cavity.d_loss", cv.d_loss, 0.0, 10.0, "");
  check_positive(out, "cavity.refractive_index", cv.refractive_index, "");
  check_positive(out, "cavity.wavelength_m", cv.wavelength_m, "");
  if (!(cv.geometric_length_m >= 0.0)) out.push_back({"cavity.geometric_length_m", "must be non-negative", ""});
  if (!(cv.air_gap_m >= 0.0)) out.push_back({"cavity.air_gap_m", "must be non-negative", ""});
  if (cv.optical_path_m() <= 0.0) out.push_back({"cavity.geometric_length_m", "cavity has zero optical length", ""});
  check_range(out, "mode_matching", c.mode_matching, 0.0, 1.0, "mode matching is a fraction");
  if (c.mode_optics) {
    const auto& m = *c.mode_optics;
    check_positive(out, "mode_optics.mirror_roc_m", m.mirror_roc_m, "");
    check_positive(out, "mode_optics.fiber_waist_m", m.fiber_waist_m, "");
    if (cv.refractive_index > 0.0 && m.membrane_thickness_m / cv.refractive_index + m.air_gap_m >= m.mirror_roc_m)
      out.push_back({"mode_optics.mirror_roc_m", "must exceed the effective cavity length", ""});
  }

  const auto& pu = c.pulses;
  check_positive(out, "pulses.fwhm_s", pu.fwhm_s, "");
  if (pu.count < 1) out.push_back({"pulses.count", "must be at least 1", ""});
  if (pu.count > 1 && !(pu.spacing_s >= 1.5 * pu.fwhm_s))
    out.push_back({"pulses.spacing_s", "modes must be separated by at least 1.5 pulse widths", ""});
  check_positive(out, "pulses.mean_photon_number", pu.mean_photon_number, "");
  if (pu.first_center_s - 3.0 * pu.fwhm_s < 0.0)
    out.push_back({"pulses.first_center_s", "pulse starts before the time record", "delay it by at least 3 FWHM"});
  if (c.analysis.echo_order < 1) out.push_back({"analysis.echo_order", "must be at least 1", ""});
  if (c.analysis.window_half_width_s) check_positive(out, "analysis.window_half_width_s", *c.analysis.window_half_width_s, "");
  if (c.analysis.afc_lifetime_s) check_positive(out, "analysis.afc_lifetime_s", *c.analysis.afc_lifetime_s, "");

  if (grid_ok && cb.spacing_hz > 0.0 && pu.fwhm_s > 0.0 && pu.count >= 1) {
    const double record = g.record_length(), edge = record / 50.0;
    const auto train = pulse_train(c);
    if (pu.first_center_s - 3.0 * pu.fwhm_s < edge) {
      std::ostringstream os;
      os << "first pulse sits in the first " << edge << " s of the record, where aliasing is checked";
      out.push_back({"pulses.first_center_s", os.str(), "delay the pulse or reduce grid.n_points"});
    }
    int order = std::max(1, c.analysis.echo_order);
    if (c.scenario == "stark_readout") order = std::max(order, c.stark.max_order);
    const auto w = echo_windows(train, cb.spacing_hz, order, c.analysis.window_half_width_s);
    const double last = w.back().end_s;
    if (last > record - edge) {
      std::ostringstream os;
      os << "echo window ends at " << last << " s, beyond the usable record (" << record - edge << " s)";
      out.push_back({"analysis.echo_order", os.str(), "increase grid.n_points or reduce the storage time"});
    }
    bool overlap = false;
    for (const auto& win : w)
      for (const auto& pl : train.pulses)
        overlap |= win.start_s < pl.center_s + pl.fwhm_s && win.end_s > pl.center_s - pl.fwhm_s;
    if (overlap)
      out.push_back({"analysis.window_half_width_s", "echo window overlaps an input pulse", "shrink the window"});
  }

  if (c.scenario == "stark_readout") {
    if (c.stark.max_order < 1) out.push_back({"stark.max_order", "must be at least 1", ""});
    if (c.stark.max_order < 3) out.push_back({"stark.max_order", "decay fit needs at least three orders", "use 3 or more"});
    if (pu.count != 1) out.push_back({"pulses.count", "on-demand readout takes a single pulse", "set count to 1"});
    if (cb.spacing_hz > 0.0 && 0.5 / cb.spacing_hz <= pu.fwhm_s)
      out.push_back({"pulses.fwhm_s", "pulse is longer than half the storage time, where the first electric pulse sits",
                     "shorten the pulse"});
  }
  if (c.scenario == "qubit") {
    if (c.qubit.analyzer != "two_path" && c.qubit.analyzer != "double_comb")
      out.push_back({"qubit.analyzer", "unknown analyzer '" + c.qubit.analyzer + "'", "use two_path or double_comb"});
    check_positive(out, "qubit.fwhm_s", c.qubit.fwhm_s, "");
    if (!(c.qubit.separation_s >= 1.5 * c.qubit.fwhm_s))
      out.push_back({"qubit.separation_s", "time bins must be separated by at least 1.5 pulse widths", ""});
    if (c.qubit.phase_points < 4) out.push_back({"qubit.phase_points", "need at least 4 phase points", ""});
  }
  if (c.scenario == "sweep") {
    if (c.sweep.schemes.empty()) out.push_back({"sweep.schemes", "must list at least one scheme", ""});
    for (std::size_t i = 0; i < c.sweep.schemes.size(); ++i) try {
        bandwidth_scheme_from(c.sweep.schemes[i]);
      } catch (const std::exception& e) {
        out.push_back({"sweep.schemes[" + std::to_string(i) + "]", e.what(),
                       "use enhanced, natural_same_crystal or natural_high_absorption"});
      }
    if (c.sweep.bandwidths_hz.empty()) out.push_back({"sweep.bandwidths_hz", "must list at least one bandwidth", ""});
    for (std::size_t i = 0; i < c.sweep.bandwidths_hz.size(); ++i) {
      const double bw = c.sweep.bandwidths_hz[i];
      if (!(bw >= c.sweep.spacing_hz) || !(bw <= c.sweep.pit_width_hz)) {
        std::ostringstream os;
        os << "bandwidth " << bw << " Hz must lie between sweep.spacing_hz and sweep.pit_width_hz ("
           << c.sweep.pit_width_hz << " Hz)";
        out.push_back({"sweep.bandwidths_hz[" + std::to_string(i) + "]", os.str(), "widen the pit or drop the point"});
      }
    }
    check_positive(out, "sweep.spacing_hz", c.sweep.spacing_hz, "");
    check_positive(out, "sweep.pit_width_hz", c.sweep.pit_width_hz, "");
    if (grid_ok && g.span_hz < 10.0 * c.sweep.pit_width_hz)
      out.push_back({"grid.span_hz", "span is less than ten times sweep.pit_width_hz", "widen the grid"});
  }
  if (c.scenario == "holeburn") {
    const auto& h = c.holeburn;
    for (std::size_t r = 0; r < 3; ++r) {
      double s = 0.0;
      for (double v : h.branching[r]) s += v;
      if (std::abs(s - 1.0) > 1e-9)
        out.push_back({"holeburn.branching[" + std::to_string(r) + "]", "row must sum to 1", ""});
    }
    if (!(h.target_hz[1] > h.target_hz[0])) out.push_back({"holeburn.target_hz", "band must be nonempty", ""});
    for (std::size_t i = 0; i < h.chirps_hz.size(); ++i) {
      const auto& ch = h.chirps_hz[i];
      const std::string at = "holeburn.chirps_hz[" + std::to_string(i) + "]";
      if (!(ch[1] > ch[0])) out.push_back({at, "chirp range must be nonempty", ""});
      if (ch[0] < 0.0 || ch[1] > h.broadening_hz) out.push_back({at, "chirp lies outside the broadening window", ""});
      if (std::min(ch[1], h.target_hz[1]) > std::max(ch[0], h.target_hz[0]))
        out.push_back({at, "chirp overlaps holeburn.target_hz", "keep the target band clear of the chirps"});
    }
  }
  if (c.scenario == "fit" && !c.fit.measured_reflectivity && !c.fit.matched_reflectivity)
    out.push_back({"fit", "needs measured_reflectivity or matched_reflectivity", ""});
  if (c.fit.measured_reflectivity) check_range(out, "fit.measured_reflectivity", *c.fit.measured_reflectivity, 0.0, 1.0, "");
  if (c.fit.matched_reflectivity) check_range(out, "fit.matched_reflectivity", *c.fit.matched_reflectivity, 0.0, 1.0, "");
  return out;
}

}  // namespace afc::config
