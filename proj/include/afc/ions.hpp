#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "afc/csv.hpp"
#include "afc/spectral.hpp"

namespace afc {

// Frequencies in this module are whole hertz so that interval endpoints compare exactly.
using hz_t = std::int64_t;

inline hz_t to_hz(double v) { return static_cast<hz_t>(std::llround(v)); }

enum class Spin : int { half = 0, three_half = 1, five_half = 2 };

inline const char* spin_label(Spin s) {
  switch (s) {
    case Spin::half: return "1/2";
    case Spin::three_half: return "3/2";
    case Spin::five_half: return "5/2";
  }
  return "?";
}

struct Transition {
  Spin ground;
  Spin excited;
  bool operator==(const Transition&) const = default;
};

inline std::string label(const Transition& t) {
  return std::string(spin_label(t.ground)) + "g->" + spin_label(t.excited) + "e";
}

/// Class order: I = 5/2g->5/2e, II = 5/2g->3/2e, III = 5/2g->1/2e, IV = 3/2g->5/2e, ..., IX = 1/2g->1/2e.
inline Transition transition_of(int index) {
  static constexpr Spin order[3] = {Spin::five_half, Spin::three_half, Spin::half};
  return Transition{order[index / 3], order[index % 3]};
}

inline int index_of(const Transition& t) {
  auto pos = [](Spin s) { return 2 - static_cast<int>(s); };
  return 3 * pos(t.ground) + pos(t.excited);
}

struct HyperfineModel {
  // {1/2-3/2, 3/2-5/2} ground splittings
  std::array<hz_t, 2> ground_splittings{34'500'000, 46'200'000};
  // {1/2-3/2, 3/2-5/2} excited splittings
  std::array<hz_t, 2> excited_splittings{75'000'000, 102'000'000};
  // excited level ordering relative to 3/2e
  bool excited_half_below = true;
  bool excited_five_half_above = true;
  hz_t broadening = 102'000'000;

  hz_t ground_energy(Spin s) const {
    switch (s) {
      case Spin::five_half: return 0;
      case Spin::three_half: return ground_splittings[1];
      case Spin::half: return ground_splittings[0] + ground_splittings[1];
    }
    return 0;
  }
  hz_t excited_energy(Spin s) const {
    switch (s) {
      case Spin::three_half: return 0;
      case Spin::half: return excited_half_below ? -excited_splittings[0] : excited_splittings[0];
      case Spin::five_half: return excited_five_half_above ? excited_splittings[1] : -excited_splittings[1];
    }
    return 0;
  }
  hz_t transition_frequency(const Transition& t) const { return excited_energy(t.excited) - ground_energy(t.ground); }
};

inline void check(const HyperfineModel& m) {
  for (auto v : m.ground_splittings)
    if (v < 0) throw std::invalid_argument("ground splittings must be non-negative");
  for (auto v : m.excited_splittings)
    if (v < 0) throw std::invalid_argument("excited splittings must be non-negative");
  if (m.broadening <= 0) throw std::invalid_argument("inhomogeneous broadening must be positive");
}

struct BranchingTable {
  // rows: ground 1/2, 3/2, 5/2; columns: excited 1/2, 3/2, 5/2
  std::array<std::array<double, 3>, 3> value{{{0.03, 0.21, 0.76}, {0.12, 0.67, 0.21}, {0.85, 0.12, 0.03}}};

  double operator()(const Transition& t) const {
    return value[static_cast<int>(t.ground)][static_cast<int>(t.excited)];
  }
};

inline BranchingTable make_branching(const std::array<std::array<double, 3>, 3>& v) {
  for (const auto& row : v) {
    double s = 0.0;
    for (double x : row) {
      if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("branching ratios must lie in [0, 1]");
      s += x;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("branching table rows must sum to 1");
  }
  return BranchingTable{v};
}

struct Interval {
  hz_t lo = 0;
  hz_t hi = 0;
  bool operator==(const Interval&) const = default;
};

struct PumpPlan {
  std::vector<Interval> chirps;
  Interval target;
};

/// Default burn: chirps over [0, 46.2] and [55.8, 102] MHz around the [46.2, 55.8] MHz target.
inline PumpPlan standard_pump_plan() {
  return PumpPlan{{{0, 46'200'000}, {55'800'000, 102'000'000}}, {46'200'000, 55'800'000}};
}

struct FactorSegment {
  hz_t lo = 0;
  hz_t hi = 0;
  double factor = 1.0;
};

struct PopulationFactorMap {
  Interval band;
  std::array<std::vector<FactorSegment>, 9> segments;  // indexed by class order

  const std::vector<FactorSegment>& of(const Transition& t) const { return segments[index_of(t)]; }
};

struct RatioSegment {
  hz_t lo = 0;
  hz_t hi = 0;
  double ratio = 1.0;
};

using ClassOffsets = std::array<std::array<double, 9>, 9>;

/// offsets[c][x]: shift that maps a chirp interval onto the pumped range of class c through transition x.
inline ClassOffsets class_offsets(const HyperfineModel& m) {
  check(m);
  ClassOffsets out{};
  for (int c = 0; c < 9; ++c)
    for (int x = 0; x < 9; ++x)
      out[c][x] = static_cast<double>(m.transition_frequency(transition_of(c)) -
                                      m.transition_frequency(transition_of(x)));
  return out;
}

/// Detuning ranges (within the broadening window) of class c that the chirps address through transition x.
inline std::vector<Interval> class_pumped_ranges(const HyperfineModel& m, const PumpPlan& plan, int c, int x) {
  const hz_t off = m.transition_frequency(transition_of(c)) - m.transition_frequency(transition_of(x));
  std::vector<Interval> out;
  for (const auto& ch : plan.chirps) {
    const hz_t lo = std::max<hz_t>(0, ch.lo + off), hi = std::min(m.broadening, ch.hi + off);
    if (hi > lo) out.push_back({lo, hi});
  }
  std::sort(out.begin(), out.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  return out;
}

inline void check(const PumpPlan& p, const HyperfineModel& m) {
  if (p.target.hi <= p.target.lo) throw std::invalid_argument("pump target band must be nonempty");
  for (const auto& ch : p.chirps) {
    if (ch.hi <= ch.lo) throw std::invalid_argument("chirp ranges must be nonempty");
    if (ch.lo < 0 || ch.hi > m.broadening) throw std::invalid_argument("chirp range lies outside the broadening window");
    if (std::min(ch.hi, p.target.hi) > std::max(ch.lo, p.target.lo))
      throw std::invalid_argument("pump target band overlaps a chirp range");
  }
}

/// Steady-state redistribution: a transition whose ground level is emptied contributes 0;
/// otherwise the surviving ground levels share the population (1, 1.5 or 3).
inline PopulationFactorMap apply_pump_plan(const HyperfineModel& m, const PumpPlan& plan) {
  check(m);
  check(plan, m);
  PopulationFactorMap out;
  out.band = plan.target;
  for (int x = 0; x < 9; ++x) {
    const auto tx = transition_of(x);
    const hz_t wx = m.transition_frequency(tx);
    std::set<hz_t> cuts{plan.target.lo, plan.target.hi};
    for (int y = 0; y < 9; ++y) {
      const hz_t o = m.transition_frequency(transition_of(y)) - wx;
      for (const auto& ch : plan.chirps)
        for (hz_t v : {ch.lo - o, ch.hi - o})
          if (v > plan.target.lo && v < plan.target.hi) cuts.insert(v);
    }
    std::vector<hz_t> pts(cuts.begin(), cuts.end());
    auto& segs = out.segments[x];
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const hz_t mid2 = pts[i] + pts[i + 1];  // twice the midpoint
      std::array<bool, 3> emptied{};
      for (int y = 0; y < 9; ++y) {
        const auto ty = transition_of(y);
        const hz_t at2 = mid2 + 2 * (m.transition_frequency(ty) - wx);
        for (const auto& ch : plan.chirps)
          if (at2 >= 2 * ch.lo && at2 <= 2 * ch.hi) emptied[static_cast<int>(ty.ground)] = true;
      }
      const int n_empty = emptied[0] + emptied[1] + emptied[2];
      double f = 0.0;
      if (!emptied[static_cast<int>(tx.ground)]) f = n_empty == 0 ? 1.0 : n_empty == 1 ? 1.5 : 3.0;
      if (!segs.empty() && segs.back().factor == f)
        segs.back().hi = pts[i + 1];
      else
        segs.push_back({pts[i], pts[i + 1], f});
    }
  }
  return out;
}

inline double factor_at(const std::vector<FactorSegment>& segs, hz_t lo, hz_t hi) {
  for (const auto& s : segs)
    if (s.lo <= lo && s.hi >= hi) return s.factor;
  throw std::invalid_argument("factor map does not cover the requested interval");
}

inline std::vector<RatioSegment> enhancement_ratios(const PopulationFactorMap& f, const BranchingTable& br,
                                                    Interval band) {
  std::set<hz_t> cuts{band.lo, band.hi};
  for (const auto& segs : f.segments)
    for (const auto& s : segs)
      for (hz_t v : {s.lo, s.hi})
        if (v > band.lo && v < band.hi) cuts.insert(v);
  std::vector<hz_t> pts(cuts.begin(), cuts.end());
  std::vector<RatioSegment> out;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (int x = 0; x < 9; ++x) {
      const auto t = transition_of(x);
      num += br(t) * factor_at(f.segments[x], pts[i], pts[i + 1]);
      den += br(t);
    }
    const double r = num / den;
    if (!out.empty() && out.back().ratio == r)
      out.back().hi = pts[i + 1];
    else
      out.push_back({pts[i], pts[i + 1], r});
  }
  return out;
}

/// Bins whose centre falls inside a ratio segment are scaled; later segments win on shared edges.
inline AbsorptionProfile enhance_profile(const AbsorptionProfile& base, const std::vector<RatioSegment>& ratios,
                                         Interval band) {
  const auto& g = base.grid;
  if (!g.contains(static_cast<double>(band.lo), static_cast<double>(band.hi)))
    throw std::invalid_argument("enhancement band lies outside the grid");
  auto out = base;
  for (std::size_t k = 0; k < g.n_points; ++k) {
    const double nu = g.frequency(k);
    if (nu < static_cast<double>(band.lo) || nu > static_cast<double>(band.hi)) continue;
    for (const auto& r : ratios)
      if (nu >= static_cast<double>(r.lo) && nu <= static_cast<double>(r.hi)) out.depth[k] = base.depth[k] * r.ratio;
  }
  return out;
}

inline void write_csv(std::ostream& os, const PopulationFactorMap& f) {
  os << "transition,low_hz,high_hz,factor\n";
  for (int x = 0; x < 9; ++x)
    for (const auto& s : f.segments[x])
      csv::row(os, label(transition_of(x)), static_cast<double>(s.lo), static_cast<double>(s.hi), s.factor);
}

inline void write_csv(std::ostream& os, const std::vector<RatioSegment>& r) {
  os << "low_hz,high_hz,ratio\n";
  for (const auto& s : r) csv::row(os, static_cast<double>(s.lo), static_cast<double>(s.hi), s.ratio);
}

}  // namespace afc
