#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <sstream>

#include "afc/ions.hpp"

using namespace afc;

namespace {

constexpr hz_t MHz(double v) { return static_cast<hz_t>(v * 1e6 + (v >= 0 ? 0.5 : -0.5)); }

struct Expected {
  Transition t;
  std::vector<FactorSegment> segs;
};

// Published per-transition enhancement table for the standard burn.
std::vector<Expected> published_factors() {
  using S = Spin;
  const hz_t a = MHz(46.2), b = MHz(50.1), c = MHz(51.9), d = MHz(55.8);
  return {
      {{S::half, S::half}, {{a, d, 1.5}}},
      {{S::half, S::three_half}, {{a, b, 1.5}, {b, d, 3.0}}},
      {{S::half, S::five_half}, {{a, d, 3.0}}},
      {{S::three_half, S::half}, {{a, d, 3.0}}},
      {{S::three_half, S::three_half}, {{a, d, 3.0}}},
      {{S::three_half, S::five_half}, {{a, d, 3.0}}},
      {{S::five_half, S::half}, {{a, c, 3.0}, {c, d, 1.5}}},
      {{S::five_half, S::three_half}, {{a, d, 3.0}}},
      {{S::five_half, S::five_half}, {{a, d, 1.5}}},
  };
}

PopulationFactorMap standard_map() { return apply_pump_plan(HyperfineModel{}, standard_pump_plan()); }

}  // namespace

TEST(Transitions, IndexRoundTrip) {
  for (int i = 0; i < 9; ++i) EXPECT_EQ(index_of(transition_of(i)), i);
  EXPECT_EQ(label(transition_of(0)), "5/2g->5/2e");
  EXPECT_EQ(label(transition_of(8)), "1/2g->1/2e");
}

TEST(ClassOffsets, ResonantDiagonalIsZero) {
  const auto o = class_offsets(HyperfineModel{});
  for (int c = 0; c < 9; ++c) EXPECT_EQ(o[c][c], 0.0);
}

TEST(ClassOffsets, ClassFourSeesGroundSplitting) {
  const auto o = class_offsets(HyperfineModel{});
  const int iv = index_of({Spin::three_half, Spin::five_half});
  EXPECT_EQ(iv, 3);
  EXPECT_DOUBLE_EQ(o[iv][index_of({Spin::five_half, Spin::five_half})], -46.2e6);
}

TEST(ClassOffsets, ClassFourPumpedRangeUnderBothChirps) {
  // 5/2g->5/2e ions of class IV sit 46.2 MHz above the laser: P3 reaches them on [9.6, 55.8] MHz
  HyperfineModel m;
  const auto ranges = class_pumped_ranges(m, standard_pump_plan(), 3, 0);
  bool found = false;
  for (const auto& r : ranges) found |= (r.lo == MHz(9.6) && r.hi == MHz(55.8));
  EXPECT_TRUE(found);
}

TEST(ClassOffsets, DegenerateModelHasNoOffsets) {
  HyperfineModel m;
  m.ground_splittings = {0, 0};
  m.excited_splittings = {0, 0};
  for (const auto& row : class_offsets(m))
    for (double v : row) EXPECT_EQ(v, 0.0);
}

TEST(PumpPlan, EmptyPlanLeavesFactorOne) {
  const auto f = apply_pump_plan(HyperfineModel{}, PumpPlan{{}, {MHz(46.2), MHz(55.8)}});
  for (const auto& segs : f.segments) {
    ASSERT_EQ(segs.size(), 1u);
    EXPECT_EQ(segs[0].factor, 1.0);
  }
  const auto r = enhancement_ratios(f, BranchingTable{}, f.band);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r[0].ratio, 1.0);
}

TEST(PumpPlan, ReproducesPublishedFactorTable) {
  const auto f = standard_map();
  for (const auto& e : published_factors()) {
    const auto& got = f.of(e.t);
    ASSERT_EQ(got.size(), e.segs.size()) << label(e.t);
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].lo, e.segs[i].lo) << label(e.t);
      EXPECT_EQ(got[i].hi, e.segs[i].hi) << label(e.t);
      EXPECT_EQ(got[i].factor, e.segs[i].factor) << label(e.t);
    }
  }
}

TEST(PumpPlan, FactorsTakeAllowedValues) {
  for (const auto& segs : standard_map().segments)
    for (const auto& s : segs) EXPECT_TRUE(s.factor == 0.0 || s.factor == 1.0 || s.factor == 1.5 || s.factor == 3.0);
}

TEST(PumpPlan, ChirpOrderDoesNotMatter) {
  auto plan = standard_pump_plan();
  const auto a = apply_pump_plan(HyperfineModel{}, plan);
  std::reverse(plan.chirps.begin(), plan.chirps.end());
  const auto b = apply_pump_plan(HyperfineModel{}, plan);
  for (int x = 0; x < 9; ++x) {
    ASSERT_EQ(a.segments[x].size(), b.segments[x].size());
    for (std::size_t i = 0; i < a.segments[x].size(); ++i) {
      EXPECT_EQ(a.segments[x][i].lo, b.segments[x][i].lo);
      EXPECT_EQ(a.segments[x][i].factor, b.segments[x][i].factor);
    }
  }
}

TEST(PumpPlan, RejectsInconsistentPlans) {
  HyperfineModel m;
  EXPECT_THROW(apply_pump_plan(m, PumpPlan{{{MHz(40), MHz(50)}}, {MHz(46.2), MHz(55.8)}}), std::invalid_argument);
  EXPECT_THROW(apply_pump_plan(m, PumpPlan{{{MHz(0), MHz(120)}}, {MHz(130), MHz(131)}}), std::invalid_argument);
  EXPECT_THROW(apply_pump_plan(m, PumpPlan{{}, {MHz(50), MHz(50)}}), std::invalid_argument);
}

TEST(Ratios, ThreePlateausWithExactBreakpoints) {
  const auto f = standard_map();
  const auto r = enhancement_ratios(f, BranchingTable{}, f.band);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_EQ(r[0].lo, MHz(46.2));
  EXPECT_EQ(r[0].hi, MHz(50.1));
  EXPECT_EQ(r[1].hi, MHz(51.9));
  EXPECT_EQ(r[2].hi, MHz(55.8));
  // sum over transitions of factor x branching ratio, over the three ground rows
  EXPECT_NEAR(r[0].ratio, (0.03 * 1.5 + 0.21 * 1.5 + 0.76 * 3 + 3.0 + 0.85 * 3 + 0.12 * 3 + 0.03 * 1.5) / 3, 1e-12);
  EXPECT_NEAR(r[1].ratio, 8.91 / 3.0, 1e-12);
  EXPECT_NEAR(r[0].ratio, 2.87, 0.01);
  EXPECT_NEAR(r[1].ratio, 2.97, 0.01);
  EXPECT_NEAR(r[2].ratio, 2.55, 0.01);
  for (const auto& s : r) {
    EXPECT_GE(s.ratio, 0.0);
    EXPECT_LE(s.ratio, 3.0);
  }
}

TEST(Branching, RowsMustSumToOne) {
  EXPECT_THROW(make_branching({{{0.5, 0.5, 0.1}, {0.12, 0.67, 0.21}, {0.85, 0.12, 0.03}}}), std::invalid_argument);
  EXPECT_THROW(make_branching({{{1.2, -0.2, 0.0}, {0.12, 0.67, 0.21}, {0.85, 0.12, 0.03}}}), std::invalid_argument);
  EXPECT_NO_THROW(make_branching(BranchingTable{}.value));
}

TEST(Enhance, ScalesBaseDepthIntoTargetBand) {
  const auto g = build_grid(200e6, 1u << 15, 51e6);
  const auto f = standard_map();
  const auto r = enhancement_ratios(f, BranchingTable{}, f.band);
  for (double base : {0.97, 0.052}) {
    const auto out = enhance_profile(flat_profile(g, base), r, f.band);
    double s = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < g.n_points; ++k) {
      const double nu = g.frequency(k);
      if (nu > 46.3e6 && nu < 55.7e6) {
        s += out.depth[k];
        ++n;
      } else if (nu < 46.1e6 || nu > 55.9e6) {
        EXPECT_EQ(out.depth[k], base);
      }
    }
    EXPECT_NEAR(s / n / base, 2.8, 0.15);
  }
  EXPECT_NEAR(0.97 * 2.7, 2.6, 0.05);
  EXPECT_NEAR(0.052 * 2.7, 0.14, 0.005);
}

TEST(Enhance, UnitRatiosAreIdentity) {
  const auto g = build_grid(200e6, 1u << 15, 51e6);
  const auto base = flat_profile(g, 0.97);
  const auto out = enhance_profile(base, {{MHz(46.2), MHz(55.8), 1.0}}, {MHz(46.2), MHz(55.8)});
  EXPECT_EQ(out.depth, base.depth);
}

TEST(Csv, FactorAndRatioHeaders) {
  std::ostringstream a, b;
  const auto f = standard_map();
  write_csv(a, f);
  write_csv(b, enhancement_ratios(f, BranchingTable{}, f.band));
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "transition,low_hz,high_hz,factor");
  EXPECT_EQ(b.str().substr(0, b.str().find('\n')), "low_hz,high_hz,ratio");
}
