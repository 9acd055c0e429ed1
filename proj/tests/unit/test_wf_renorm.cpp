#include <gtest/gtest.h>

#include <cmath>

#include "ipslab/error.hpp"
#include "ipslab/wf_renorm.hpp"

using namespace ipslab;

namespace {

UOptions quick(std::size_t paths, std::uint64_t seed) {
  UOptions o;
  o.paths = paths;
  o.seed = seed;
  return o;
}

CatalyzingFn coarse(double (*p)(double), std::size_t m = 8) { return CatalyzingFn::sample(p, m); }

}  // namespace

// ---------------------------------------------------------------- Beta law

TEST(Beta, TrapsAreDeterministic) {
  Engine eng = Stream(1).engine();
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(beta_stationary_sample(0.0, 1.0, eng), 0.0);
    EXPECT_EQ(beta_stationary_sample(1.0, 0.3, eng), 1.0);
  }
}

TEST(Beta, FirstTwoMoments) {
  RunningStats m1, m2;
  for (std::size_t r = 0; r < 100000; ++r) {
    Engine eng = Stream(2).child(r).engine();
    const double y = beta_stationary_sample(0.5, 1.0, eng);
    m1.add(y);
    m2.add(y * y);
  }
  EXPECT_LT(std::abs(z_score(m1.estimate(), 0.5)), 4.0);
  EXPECT_LT(std::abs(z_score(m2.estimate(), 0.375)), 4.0);
}

TEST(Beta, MomentFormula) {
  EXPECT_DOUBLE_EQ(beta_moment(0.3, 2.0, 1), 0.3);
  EXPECT_DOUBLE_EQ(beta_moment(0.5, 1.0, 2), 0.375);
  EXPECT_NEAR(beta_moment(0.5, 1.0, 3), 0.5 * 0.75 * (2.5 / 3.0), 1e-15);
}

TEST(Beta, FixedShapeIdentity) {
  for (int i = 0; i <= 20; ++i)
    for (double g : {0.01, 0.1, 0.5, 1.0, 2.0, 10.0}) {
      const double x = i / 20.0;
      EXPECT_NEAR(beta_moment(x, g, 1) - beta_moment(x, g, 2), x * (1 - x) / (1 + g), 1e-12);
    }
}

TEST(Beta, SmallShapesStayFinite) {
  Engine eng = Stream(3).engine();
  for (int k = 0; k < 10000; ++k) {
    const double y = beta_stationary_sample(0.01, 2.0, eng);
    ASSERT_TRUE(y >= 0.0 && y <= 1.0);
  }
}

// ---------------------------------------------------------------- stationary paths

TEST(WFPath, TrapIsConstant) {
  Engine eng = Stream(4).engine();
  const auto path = wf_stationary_path({1.0, 1.0, 1e-3}, 2.0, eng);
  EXPECT_EQ(path.size(), 2001u);
  for (double y : path) ASSERT_EQ(y, 1.0);
}

TEST(WFPath, TimeAverages) {
  RunningStats mean_y, mean_h;
  for (std::size_t r = 0; r < 100; ++r) {
    Engine eng = Stream(5).child(r).engine();
    const auto a = wf_stationary_path({1.0, 0.3, 1e-3}, 50.0, eng);
    double s = 0;
    for (double y : a) s += y;
    mean_y.add(s / static_cast<double>(a.size()));
    Engine eng2 = Stream(6).child(r).engine();
    const auto b = wf_stationary_path({1.0, 0.5, 1e-3}, 50.0, eng2);
    s = 0;
    for (double y : b) s += y * (1 - y);
    mean_h.add(s / static_cast<double>(b.size()));
  }
  EXPECT_LT(std::abs(z_score(mean_y.estimate(), 0.3)), 4.0);
  EXPECT_LT(std::abs(z_score(mean_h.estimate(), 0.125)), 4.0);
}

TEST(WFPath, DefaultStep) {
  EXPECT_DOUBLE_EQ(wf_default_dt(1.0), 0.02);
  EXPECT_DOUBLE_EQ(wf_default_dt(0.05), 1e-3);
}

// ---------------------------------------------------------------- schedule

TEST(Schedule, ConstantGamma) {
  const auto s = GammaSchedule::constant_gamma(0.7);
  for (int n = 0; n < 5; ++n) EXPECT_DOUBLE_EQ(s.gamma(n), 0.7);
}

TEST(Schedule, GeometricLimit) {
  const auto s = GammaSchedule::geometric(0.5);
  EXPECT_DOUBLE_EQ(s.s(0), 0.0);
  EXPECT_DOUBLE_EQ(s.s(2), 1.0 + 1.5);
  EXPECT_DOUBLE_EQ(s.gamma(0), 1.0);
  EXPECT_NEAR(s.gamma(60), 0.5, 1e-6);
  const auto flat = GammaSchedule::geometric(0.0, 2.0);
  // c_k = 1 gives gamma_n = 1/(beta + n).
  EXPECT_DOUBLE_EQ(flat.gamma(3), 0.2);
}

// ---------------------------------------------------------------- U_gamma

TEST(UGamma, ConstantsMatchClosedForm) {
  EXPECT_DOUBLE_EQ(u_gamma_constant(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(u_gamma_constant(2.0, 1.0), 4.0 / 3.0);
  std::uint64_t seed = 10;
  for (double g : {0.5, 1.0, 2.0})
    for (double r : {0.5, 1.0, 2.0}) {
      const auto e = u_gamma_point([r](double) { return r; }, 0.5, g, quick(4000, ++seed));
      EXPECT_LT(std::abs(z_score(e, u_gamma_constant(r, g))), 4.0) << "gamma=" << g << " r=" << r;
    }
}

TEST(UGamma, ZeroStaysZero) {
  const auto u = u_gamma_apply(CatalyzingFn(GridFn1D(8)), 1.0, quick(200, 1));
  for (double v : u.f.v) EXPECT_EQ(v, 0.0);
  const auto w = u_gamma_apply_product(CatalyzingFn(GridFn1D(8)), 1.0, quick(200, 1));
  for (double v : w.f.v) EXPECT_EQ(v, 0.0);
}

TEST(UGamma, ProductEstimatorOnOneIsOne) {
  const auto u = u_gamma_apply_product(CatalyzingFn(GridFn1D(4, 1.0)), 1.5, quick(200, 2));
  for (double v : u.f.v) EXPECT_EQ(v, 1.0);
}

TEST(UGamma, ProductEstimatorConstants) {
  for (double r : {0.3, 0.7}) {
    const auto e = u_gamma_product_point([r](double) { return r; }, 0.4, 1.0, quick(20000, 21));
    EXPECT_LT(std::abs(z_score(e, u_gamma_constant(r, 1.0))), 4.0) << r;
  }
}

TEST(UGamma, ProductRejectsOutOfRange) {
  EXPECT_THROW(u_gamma_apply_product(CatalyzingFn(GridFn1D(4, 1.5)), 1.0, quick(10, 1)), Error);
}

TEST(UGamma, EstimatorsAgreeOnIdentity) {
  const auto p = coarse(h1);
  const auto a = u_gamma_apply(p, 1.0, quick(4000, 31));
  const auto b = u_gamma_apply_product(p, 1.0, quick(4000, 32));
  EXPECT_LT(std::abs(pooled_z(a, b)), 4.0);
  EXPECT_EQ(a.f.v.front(), 0.0);
}

TEST(UGamma, HarmonicityClasses) {
  const auto u00 = u_gamma_apply(coarse(h00), 1.0, quick(3000, 41));
  const auto u01 = u_gamma_apply(coarse(h01), 1.0, quick(3000, 42));
  const auto ux = u_gamma_apply(coarse(h1), 1.0, quick(3000, 43));
  const auto u11 = u_gamma_apply(coarse(h11), 1.0, quick(3000, 44));
  for (std::size_t i = 0; i <= 8; ++i) {
    const double x = i / 8.0;
    EXPECT_LE(u00.f.v[i], h00(x) + 4 * u00.se[i]) << x;
    EXPECT_LE(u01.f.v[i], h01(x) + 4 * u01.se[i]) << x;
    EXPECT_GE(ux.f.v[i], h1(x) - 4 * ux.se[i]) << x;
    EXPECT_LT(std::abs(z_score({u11.f.v[i], u11.se[i]}, 1.0)), 4.0) << x;
  }
}

TEST(UGamma, PreservesMonotoneConcave) {
  const auto u = u_gamma_apply(coarse(h01), 1.0, quick(3000, 51));
  for (std::size_t i = 0; i + 1 <= 8; ++i) EXPECT_GE(u.f.v[i + 1] - u.f.v[i], -4 * u.se[i + 1]) << i;
  for (std::size_t i = 1; i + 1 <= 8; ++i)
    EXPECT_LE(u.f.v[i + 1] - 2 * u.f.v[i] + u.f.v[i - 1], 4 * u.se[i]) << i;
}

TEST(UGamma, ReproducibleFromSeed) {
  const auto a = u_gamma_apply(coarse(h1, 4), 0.5, quick(100, 7));
  const auto b = u_gamma_apply(coarse(h1, 4), 0.5, quick(100, 7));
  EXPECT_EQ(a.f.v, b.f.v);
}

TEST(Renorm, IteratesMoveTowardClassLimits) {
  const auto sched = GammaSchedule::constant_gamma(1.0);
  const auto up = iterate_renorm(CatalyzingFn(GridFn1D(6, 0.5)), sched, 3, quick(1500, 61));
  ASSERT_EQ(up.size(), 4u);
  const std::vector<double> one(7, 1.0), zero(7, 0.0);
  EXPECT_LT(sup_distance(up[3].f.v, one), sup_distance(up[0].f.v, one));
  const auto down = iterate_renorm(coarse(h00, 6), sched, 3, quick(1500, 62));
  EXPECT_LT(sup_distance(down[3].f.v, zero), sup_distance(down[0].f.v, zero));
  EXPECT_EQ(down[3].l(), 0);
  EXPECT_EQ(down[3].r(), 0);
  EXPECT_EQ(up[3].l(), 1);
}

// ---------------------------------------------------------------- ancestral chain

TEST(Ancestral, SingleLineageReachesReservoir) {
  Engine eng = Stream(70).engine();
  for (int k = 0; k < 100; ++k) EXPECT_EQ(ancestral_chain(1, 0.3, eng), 1);
}

TEST(Ancestral, MomentDuality) {
  RunningStats pw, mean;
  for (std::size_t r = 0; r < 100000; ++r) {
    Engine eng = Stream(71).child(r).engine();
    pw.add(std::pow(0.5, ancestral_chain(3, 1.0, eng)));
    Engine eng2 = Stream(72).child(r).engine();
    mean.add(static_cast<double>(ancestral_chain(2, 1.0, eng2)));
  }
  EXPECT_LT(std::abs(z_score(pw.estimate(), beta_moment(0.5, 1.0, 3))), 4.0);
  EXPECT_DOUBLE_EQ(psi_mean(2, 1.0), 1.5);
  EXPECT_LT(std::abs(z_score(mean.estimate(), 1.5)), 4.0);
}

// ---------------------------------------------------------------- catalytic equilibrium

TEST(Catalytic, EquilibriumMoments) {
  CatalyticParams p;
  p.x2 = 0.3;
  p.p = h1;
  p.burn = 5;
  p.duration = 50;
  const auto m = catalytic_equilibrium(p, 24, 80);
  EXPECT_LT(std::abs(z_score(m.h1, 0.125)), 4.0);
  EXPECT_LT(std::abs(z_score(m.mean1, 0.5)), 4.0);
  EXPECT_LT(std::abs(z_score(m.mean2, 0.3)), 4.0);
  EXPECT_LT(std::abs(z_score(m.w11, 0.125)), 4.0);
}

TEST(Catalytic, ScalingInvariance) {
  CatalyticParams a;
  a.p = h1;
  a.burn = 5;
  a.duration = 50;
  CatalyticParams b = a;
  b.c = 2.0;
  b.alpha = 2.0;
  b.p = [](double x) { return 2.0 * x; };
  b.dt = 5e-4;
  b.duration = 25;
  b.burn = 2.5;
  const auto ma = catalytic_equilibrium(a, 24, 81);
  const auto mb = catalytic_equilibrium(b, 24, 82);
  EXPECT_LT(std::abs(z_score(ma.var1, mb.var1)), 4.0);
  EXPECT_LT(std::abs(z_score(ma.var2, mb.var2)), 4.0);
  EXPECT_LT(std::abs(z_score(ma.cov12, mb.cov12)), 4.0);
  EXPECT_LT(std::abs(z_score(ma.mean2, mb.mean2)), 4.0);
}

TEST(Catalytic, OneStepIdentity) {
  const double g = 1.0;
  CatalyticParams p;
  p.c = 1.0 / g;
  p.p = h1;
  p.burn = 5;
  p.duration = 50;
  const auto m = catalytic_equilibrium(p, 24, 83);
  const Estimate lhs{(1 + g) * m.w22.mean, (1 + g) * m.w22.se};
  const auto u = u_gamma_point(h1, 0.5, g, quick(10000, 84));
  const Estimate rhs{0.25 * u.mean, 0.25 * u.se};
  EXPECT_LT(std::abs(z_score(lhs, rhs)), 4.0);
}

TEST(Catalytic, RejectsMissingCatalyst) {
  EXPECT_THROW(catalytic_equilibrium(CatalyticParams{}, 2, 1), Error);
}

// ---------------------------------------------------------------- binary splitting

TEST(Binsplit, Traps) {
  const auto at0 = binsplit_simulate(1.0, 0.0, 5.0, 50, 1);
  EXPECT_EQ(at0.interior_or_one.mean, 0.0);
  const auto at1 = binsplit_simulate(1.0, 1.0, 5.0, 50, 1);
  EXPECT_EQ(at1.interior_or_one.mean, 1.0);
  EXPECT_EQ(at1.at_one.mean, 1.0);
}

TEST(Binsplit, SurvivalDecreasesInTime) {
  const auto a = binsplit_simulate(1.0, 0.5, 0.5, 2000, 2);
  const auto b = binsplit_simulate(1.0, 0.5, 5.0, 2000, 2);
  EXPECT_GE(a.interior_or_one.mean + 1e-12, b.interior_or_one.mean);
  EXPECT_LE(a.at_one.mean, b.at_one.mean + 1e-12);
  EXPECT_GT(b.interior_or_one.mean, 0.0);
}

TEST(Binsplit, GuardAborts) {
  EXPECT_THROW(binsplit_simulate(50.0, 0.5, 2.0, 1, 3, 1e-3, 20), Error);
}

// ---------------------------------------------------------------- size-biased kernel, absorption

TEST(SizeBiased, KernelMoment) {
  EXPECT_DOUBLE_EQ(kyy_moment(0.0, 1.0), 1.0 / 6.0);
  for (auto [x, g] : {std::pair{0.0, 1.0}, {0.3, 0.5}, {0.5, 2.0}}) {
    RunningStats s;
    for (std::size_t r = 0; r < 20000; ++r) {
      Engine eng = Stream(90).child(r).engine();
      const double y = size_biased_sample(x, g, eng);
      s.add(y * (1 - y));
    }
    EXPECT_LT(std::abs(z_score(s.estimate(), kyy_moment(x, g))), 4.0) << x << " " << g;
  }
}

TEST(Absorption, SurvivalBelowBound) {
  for (double x : {0.05, 0.1})
    for (double t : {1.0, 2.0}) {
      const auto e = wf_survival(x, t, 4000, 100);
      EXPECT_LE(e.mean, absorption_bound(x, t) + 4 * e.se) << x << " " << t;
      EXPECT_GT(e.mean, 0.0);
    }
  EXPECT_EQ(wf_survival(0.0, 1.0, 10, 1).mean, 0.0);
  EXPECT_DOUBLE_EQ(absorption_bound(0.1, 2.0), 0.4);
}
