#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "prosocial/equilibrium.hpp"

using namespace prosocial;

namespace {

ModelParams make(double c, int r, double s_vv, double s_va = 0.0, double vis = 1.0) {
  ModelParamValues v;
  v.c = c;
  v.R = r;
  v.s_vv = s_vv;
  v.s_va = s_va;
  v.vis = vis;
  return ModelParams(v);
}

// Independent root finder: dense scan of the defect, then linear
// interpolation across the first sign change.
double scan_root(const ModelParams& p) {
  const int n = 200000;
  const double lo = -2.0, hi = 3.0;
  double prev_t = lo, prev_d = lo - threshold_rhs(p, lo);
  for (int i = 1; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    const double d = t - threshold_rhs(p, t);
    if (prev_d == 0.0) return prev_t;
    if ((prev_d < 0.0) != (d < 0.0)) return prev_t + (t - prev_t) * prev_d / (prev_d - d);
    prev_t = t;
    prev_d = d;
  }
  return std::nan("");
}

std::vector<double> grid(double lo, double hi, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
  return out;
}

}  // namespace

TEST(SolveThreshold, NoNormsGivesDirectThreshold) {
  const EquilibriumResult r = solve_threshold(make(0.6, 1, 0.0), BeliefMode::rational);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.t_star, 0.6);
  EXPECT_EQ(r.residual, 0.0);
  EXPECT_DOUBLE_EQ(r.participation_rate, 1.0 - 0.18);
}

TEST(SolveThreshold, UniformTailClosedForm) {
  const EquilibriumResult r = solve_threshold(make(0.5, 0, 0.0, 0.4), BeliefMode::rational);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.t_star, 0.3, 1e-10);
  EXPECT_LE(r.residual, 1e-10);
}

TEST(SolveThreshold, PositiveExtrinsicNormLowersThreshold) {
  const ModelParams p = make(0.4, 1, 0.5);
  const EquilibriumResult r = solve_threshold(p, BeliefMode::rational);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.t_star, 0.4);
  EXPECT_NEAR(r.t_star, scan_root(p), 1e-6);
}

TEST(SolveThreshold, NegativeExtrinsicNormRaisesThreshold) {
  const ModelParams p = make(0.4, 1, -0.5);
  const EquilibriumResult r = solve_threshold(p, BeliefMode::rational);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.t_star, 0.4);
  EXPECT_NEAR(r.t_star, scan_root(p), 1e-6);
}

TEST(SolveThreshold, ResultInvariants) {
  for (double c : grid(0.0, 1.0, 11)) {
    for (double s : grid(-1.0, 1.0, 9)) {
      for (int r : {0, 1}) {
        const ModelParams p = make(c, r, s, 0.5 * s);
        const EquilibriumResult e = solve_threshold(p, BeliefMode::rational);
        ASSERT_TRUE(e.converged);
        EXPECT_LE(e.residual, 1e-10);
        EXPECT_NEAR(e.residual, std::abs(e.t_star - threshold_rhs(p, e.t_star)), 1e-15);
        EXPECT_EQ(e.participation_rate, participation_mass({p.incentive(), e.t_star}));
        EXPECT_EQ(e.roots.size(), 1u);
        EXPECT_EQ(e.mode, BeliefMode::rational);
      }
    }
  }
}

TEST(SolveThreshold, MonotoneInNormAndCost) {
  const auto cs = grid(0.1, 0.9, 9);
  const auto ss = grid(-1.0, 1.0, 9);
  for (BeliefMode mode : {BeliefMode::rational, BeliefMode::naive}) {
    for (double c : cs) {
      double prev_t = std::numeric_limits<double>::infinity();
      double prev_rate = -1.0;
      for (double s : ss) {
        const EquilibriumResult e = solve_threshold(make(c, 1, s), mode);
        EXPECT_LE(e.t_star, prev_t) << "c=" << c << " S_vv=" << s;
        EXPECT_GE(e.participation_rate, prev_rate);
        prev_t = e.t_star;
        prev_rate = e.participation_rate;
      }
    }
    for (double s : ss) {
      double prev = -std::numeric_limits<double>::infinity();
      for (double c : cs) {
        const EquilibriumResult e = solve_threshold(make(c, 1, s), mode);
        EXPECT_GE(e.t_star, prev) << "c=" << c << " S_vv=" << s;
        prev = e.t_star;
      }
    }
  }
}

TEST(SolveThreshold, NaiveAndRationalCoincideWithoutNorms) {
  for (double c : grid(0.0, 1.0, 21)) {
    for (int r : {0, 1}) {
      const auto a = solve_threshold(make(c, r, 0.0), BeliefMode::rational);
      const auto b = solve_threshold(make(c, r, 0.0), BeliefMode::naive);
      EXPECT_EQ(a.t_star, b.t_star);
      EXPECT_EQ(a.participation_rate, b.participation_rate);
    }
  }
}

TEST(SolveThreshold, NaiveUsesBeliefsAtCost) {
  const ModelParams p = make(0.4, 1, 0.8);
  const EquilibriumResult e = solve_threshold(p, BeliefMode::naive);
  EXPECT_EQ(e.mode, BeliefMode::naive);
  EXPECT_EQ(e.t_star, threshold_rhs(p, 0.4));
  EXPECT_EQ(e.beliefs.e_vv_act, equilibrium_beliefs(Incentive::offered, 0.4).e_vv_act);
  EXPECT_TRUE(e.converged);
}

TEST(SolveThreshold, StrongPositiveNormPushesEveryoneToAct) {
  const EquilibriumResult e = solve_threshold(make(0.1, 1, 1.0), BeliefMode::rational);
  EXPECT_TRUE(e.converged);
  EXPECT_LT(e.t_star, 0.0);
  EXPECT_EQ(e.participation_rate, 1.0);
}

TEST(SolveThreshold, UnreachableToleranceIsReportedNotHidden) {
  SolverOptions opt;
  opt.tolerance = 1e-300;
  opt.max_iterations = 3;
  const EquilibriumResult e = solve_threshold(make(0.3, 1, 0.7), BeliefMode::rational, opt);
  if (!e.converged) {
    EXPECT_GT(e.residual, opt.tolerance);
  }
  EXPECT_LE(e.bracket_lo, e.t_star);
  EXPECT_GE(e.bracket_hi, e.t_star);
  EXPECT_LT(e.residual, 1e-12);
}

TEST(ReputationalCost, SpotValuesAtOneHalf) {
  const ReputationCostPoint p = reputational_cost(0.5);
  EXPECT_NEAR(p.extrinsic_cost, 0.380952380952381, 1e-12);
  EXPECT_NEAR(p.intrinsic_cost, 0.119047619047619, 1e-12);
}

TEST(ReputationalCost, CurveShapes) {
  const auto curve = reputational_cost_curve(grid(0.01, 0.99, 99));
  for (std::size_t i = 1; i < curve.size(); ++i) {
    EXPECT_GE(curve[i].intrinsic_cost, curve[i - 1].intrinsic_cost);
    EXPECT_LE(curve[i].extrinsic_cost, curve[i - 1].extrinsic_cost);
  }
  for (const auto& p : curve) {
    EXPECT_GE(p.intrinsic_cost, 0.0);
    EXPECT_GE(p.extrinsic_cost, 0.0);
  }
}

TEST(ReputationalCost, IntrinsicCostVanishesAsCostVanishes) {
  EXPECT_NEAR(reputational_cost(1e-6).intrinsic_cost, 0.0, 1e-6);
  EXPECT_EQ(reputational_cost(0.0).intrinsic_cost, 0.0);
}

TEST(ReputationalCost, RejectsCostOutsideUnitInterval) {
  EXPECT_THROW(reputational_cost(1.5), ConfigError);
  EXPECT_THROW(reputational_cost_curve({0.2, -0.1}), ConfigError);
}

TEST(CalibrateNorm, RoundTrip) {
  for (double s : grid(-0.8, 0.8, 17)) {
    const ModelParams p = make(0.5, 1, s);
    const double rate = solve_threshold(p, BeliefMode::rational).participation_rate;
    const CalibrationResult c = calibrate_norm(rate, p.with("S_vv", 0.0), BeliefMode::rational);
    EXPECT_NEAR(c.s_vv, s, 1e-6);
    EXPECT_NEAR(c.achieved_rate, rate, 1e-12);
  }
}

TEST(CalibrateNorm, NeutralNormRoundTrip) {
  const ModelParams p = make(0.6, 1, 0.0);
  const double rate = solve_threshold(p, BeliefMode::rational).participation_rate;
  EXPECT_NEAR(calibrate_norm(rate, p, BeliefMode::rational).s_vv, 0.0, 1e-9);
}

TEST(CalibrateNorm, NaiveModeRoundTrip) {
  const ModelParams p = make(0.7, 1, 0.3);
  const double rate = solve_threshold(p, BeliefMode::naive).participation_rate;
  EXPECT_NEAR(calibrate_norm(rate, p, BeliefMode::naive).s_vv, 0.3, 1e-6);
}

TEST(CalibrateNorm, UnattainableTargetCarriesInterval) {
  try {
    calibrate_norm(0.999, make(0.9, 1, 0.0), BeliefMode::rational);
    FAIL() << "expected UnattainableTargetError";
  } catch (const UnattainableTargetError& e) {
    EXPECT_LT(e.attainable_hi(), 0.999);
    EXPECT_LT(e.attainable_lo(), e.attainable_hi());
  }
}

TEST(CalibrateNorm, RejectsDegenerateTargets) {
  EXPECT_THROW(calibrate_norm(0.0, make(0.5, 1, 0.0), BeliefMode::rational), ConfigError);
  EXPECT_THROW(calibrate_norm(1.0, make(0.5, 1, 0.0), BeliefMode::rational), ConfigError);
}

TEST(CalibrateNorm, FlatResponseIsUnattainableExceptAtItsValue) {
  // Without an incentive S_vv has no effect, so the attainable interval collapses.
  EXPECT_THROW(calibrate_norm(0.3, make(0.5, 0, 0.0), BeliefMode::rational), UnattainableTargetError);
}
