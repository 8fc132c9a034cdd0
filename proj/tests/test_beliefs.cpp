#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "prosocial/beliefs.hpp"

using namespace prosocial;

namespace {

constexpr Incentive kNone = Incentive::none;
constexpr Incentive kOffered = Incentive::offered;

double grid_t(int i) { return i / 10.0; }

}  // namespace

TEST(ParticipationMass, Examples) {
  EXPECT_EQ(participation_mass({kOffered, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(participation_mass({kOffered, 0.5}), 0.875);
  EXPECT_DOUBLE_EQ(participation_mass({kNone, 0.4}), 0.6);
  EXPECT_DOUBLE_EQ(participation_mass({kOffered, 1.0}), 0.5);
  EXPECT_DOUBLE_EQ(participation_mass({kOffered, 1.5}), 0.125);
}

TEST(ParticipationMass, ClampedOutsideMeaningfulRange) {
  EXPECT_EQ(participation_mass({kNone, -3.0}), 1.0);
  EXPECT_EQ(participation_mass({kNone, 1.2}), 0.0);
  EXPECT_EQ(participation_mass({kOffered, -0.1}), 1.0);
  EXPECT_EQ(participation_mass({kOffered, 2.0}), 0.0);
  EXPECT_EQ(participation_mass({kOffered, 7.0}), 0.0);
}

TEST(ExpectedMotivation, Examples) {
  EXPECT_DOUBLE_EQ(expected_motivation({kNone, 0.4}, Motivation::intrinsic, Action::act), 0.7);
  EXPECT_EQ(expected_motivation({kNone, 0.4}, Motivation::extrinsic, Action::act), 0.5);
  EXPECT_EQ(expected_motivation({kNone, 0.4}, Motivation::extrinsic, Action::abstain), 0.5);
  EXPECT_NEAR(expected_motivation({kOffered, 0.5}, Motivation::extrinsic, Action::act), 0.5476190476190476, 1e-15);
  EXPECT_NEAR(expected_motivation({kOffered, 1.0}, Motivation::extrinsic, Action::act), 2.0 / 3.0, 1e-15);
}

TEST(ExpectedMotivation, MatchesClosedFormBelowOne) {
  for (int i = 1; i < 10; ++i) {
    const double t = grid_t(i);
    const double want = (0.5 - t * t * t / 6.0) / (1.0 - t * t / 2.0);
    EXPECT_NEAR(expected_motivation({kOffered, t}, Motivation::extrinsic, Action::act), want, 1e-14) << t;
  }
}

TEST(BeliefProfile, Examples) {
  const BeliefProfile all = belief_profile({kOffered, 0.0});
  EXPECT_EQ(all.mass_act, 1.0);
  EXPECT_DOUBLE_EQ(all.e_va_act, 0.5);
  EXPECT_DOUBLE_EQ(all.e_vv_act, 0.5);
  EXPECT_TRUE(all.abstain_region_empty);
  EXPECT_EQ(all.e_va_abstain, 0.5);
  EXPECT_EQ(all.e_vv_abstain, 0.5);

  const BeliefProfile half = belief_profile({kOffered, 1.0});
  EXPECT_NEAR(half.e_vv_act, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(half.e_vv_abstain, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(half.mass_act, 0.5);

  const BeliefProfile tail = belief_profile({kNone, 0.4});
  EXPECT_DOUBLE_EQ(tail.e_va_act, 0.7);
  EXPECT_DOUBLE_EQ(tail.e_va_abstain, 0.2);
  EXPECT_EQ(tail.e_vv_act, 0.5);
  EXPECT_EQ(tail.e_vv_abstain, 0.5);
  EXPECT_FALSE(tail.degenerate());
}

TEST(BeliefProfile, EmptyRegionsCarryPriorMeanAndFlag) {
  const BeliefProfile none = belief_profile({kNone, 1.5});
  EXPECT_TRUE(none.act_region_empty);
  EXPECT_EQ(none.mass_act, 0.0);
  EXPECT_EQ(none.e_va_act, 0.5);
  EXPECT_DOUBLE_EQ(none.e_va_abstain, 0.5);

  const BeliefProfile beyond = belief_profile({kOffered, 2.5});
  EXPECT_TRUE(beyond.act_region_empty);
  EXPECT_EQ(beyond.e_vv_act, 0.5);
}

TEST(BeliefProfile, LimitConventionIsContinuousAtTheEdges) {
  const BeliefProfile edge = belief_profile({kOffered, 2.0}, OffPathBelief::limit);
  const BeliefProfile near = belief_profile({kOffered, 2.0 - 1e-6}, OffPathBelief::limit);
  EXPECT_NEAR(edge.e_vv_act, near.e_vv_act, 1e-6);
  EXPECT_NEAR(edge.e_vv_abstain, near.e_vv_abstain, 1e-6);
  EXPECT_TRUE(edge.act_region_empty);
  EXPECT_EQ(edge.e_vv_act, 1.0);

  const BeliefProfile zero = belief_profile({kNone, -1.0}, OffPathBelief::limit);
  EXPECT_EQ(zero.e_va_abstain, 0.0);
  EXPECT_EQ(zero.e_va_act, 0.5);
}

TEST(BeliefProfile, SymmetricActingMeansUnderIncentive) {
  for (int i = 0; i <= 20; ++i) {
    const BeliefProfile p = belief_profile({kOffered, grid_t(i)});
    EXPECT_EQ(p.e_va_act, p.e_vv_act);
    EXPECT_EQ(p.e_va_abstain, p.e_vv_abstain);
  }
}

TEST(BeliefProfile, LawOfTotalExpectation) {
  for (Incentive r : {kNone, kOffered}) {
    const double top = r == kNone ? 1.0 : 2.0;
    for (int i = 1; i < 400; ++i) {
      const double t = top * i / 400.0;
      const BeliefProfile p = belief_profile({r, t});
      if (p.degenerate()) continue;
      for (Motivation m : {Motivation::intrinsic, Motivation::extrinsic}) {
        const double total =
            p.mass_act * p.expected(m, Action::act) + (1.0 - p.mass_act) * p.expected(m, Action::abstain);
        EXPECT_NEAR(total, 0.5, 1e-12) << "t=" << t;
      }
    }
  }
}

TEST(BeliefProfile, ExpectationsStayInUnitInterval) {
  for (Incentive r : {kNone, kOffered}) {
    for (int i = -10; i <= 30; ++i) {
      for (OffPathBelief o : {OffPathBelief::prior_mean, OffPathBelief::limit}) {
        const BeliefProfile p = belief_profile({r, grid_t(i)}, o);
        for (double e : {p.e_va_act, p.e_va_abstain, p.e_vv_act, p.e_vv_abstain, p.mass_act}) {
          EXPECT_GE(e, 0.0);
          EXPECT_LE(e, 1.0);
        }
      }
    }
  }
}

TEST(BeliefOrdering, ActorsLookMoreIntrinsicallyMotivated) {
  for (int i = 1; i < 10; ++i) {
    const BeliefProfile p = belief_profile({kNone, grid_t(i)});
    EXPECT_GT(p.e_va_act, p.e_va_abstain);
  }
  for (int i = 1; i < 20; ++i) {
    const BeliefProfile p = belief_profile({kOffered, grid_t(i)});
    EXPECT_GT(p.e_va_act, p.e_va_abstain);
  }
}

TEST(BeliefOrdering, WithoutIncentiveExtrinsicBeliefsCoincide) {
  for (int i = -5; i <= 20; ++i) {
    const BeliefProfile p = belief_profile({kNone, grid_t(i)});
    EXPECT_EQ(p.e_vv_act, p.e_vv_abstain);
  }
}

TEST(BeliefOrdering, WithIncentiveActorsLookMoreExtrinsicallyMotivated) {
  for (int i = 1; i < 20; ++i) {
    const BeliefProfile p = belief_profile({kOffered, grid_t(i)});
    EXPECT_GT(p.e_vv_act, p.e_vv_abstain);
  }
}

TEST(UniformTail, IntrinsicGapIsExactlyOneHalf) {
  for (int i = 1; i < 1000; ++i) {
    const BeliefProfile p = belief_profile({kNone, i / 1000.0});
    EXPECT_NEAR(p.gap(Motivation::intrinsic), 0.5, 4.0 * std::numeric_limits<double>::epsilon()) << i;
  }
}

TEST(McOracle, AgreesWithClosedFormOnExample) {
  const BeliefEstimate e = mc_oracle({kOffered, 0.5}, 1'000'000, 7);
  EXPECT_NEAR(e.profile.e_vv_act, 0.547619, 0.002);
  EXPECT_NEAR(e.profile.mass_act, 0.875, 4.0 * e.se_mass);
}

TEST(McOracle, FullAndEmptyRegions) {
  const BeliefEstimate all = mc_oracle({kOffered, 0.0}, 1000, 3);
  EXPECT_EQ(all.profile.mass_act, 1.0);
  EXPECT_TRUE(all.profile.abstain_region_empty);

  const BeliefEstimate none = mc_oracle({kNone, 1.5}, 1000, 3);
  EXPECT_TRUE(none.profile.act_region_empty);
  EXPECT_EQ(none.profile.mass_act, 0.0);
  EXPECT_EQ(none.profile.e_va_act, 0.5);
  EXPECT_EQ(none.se_va_act, 0.0);
  EXPECT_EQ(none.n_act, 0u);
}

TEST(McOracle, EmptyRegionIsDistinctFromZeroEstimate) {
  // A region of positive measure that happens to hold samples reports a
  // real mean; an impossible region reports the flag instead.
  const BeliefEstimate thin = mc_oracle({kNone, 0.999}, 100000, 11);
  EXPECT_FALSE(thin.profile.act_region_empty);
  EXPECT_GT(thin.n_act, 0u);
  EXPECT_GT(thin.profile.e_va_act, 0.999);
}

TEST(McOracle, DeterministicUnderSeed) {
  const BeliefEstimate a = mc_oracle({kOffered, 0.7}, 5000, 99);
  const BeliefEstimate b = mc_oracle({kOffered, 0.7}, 5000, 99);
  EXPECT_EQ(a.profile.e_va_act, b.profile.e_va_act);
  EXPECT_EQ(a.profile.e_vv_abstain, b.profile.e_vv_abstain);
  EXPECT_EQ(a.n_act, b.n_act);
  const BeliefEstimate c = mc_oracle({kOffered, 0.7}, 5000, 100);
  EXPECT_NE(a.profile.e_va_act, c.profile.e_va_act);
}

TEST(McOracle, RejectsZeroSamples) { EXPECT_THROW(mc_oracle({kNone, 0.5}, 0, 1), ConfigError); }

TEST(McOracle, SingleSampleHasOneNonEmptySide) {
  const BeliefEstimate e = mc_oracle({kOffered, 1.0}, 1, 5);
  EXPECT_EQ(e.n_act + e.n_abstain, 1u);
  EXPECT_NE(e.profile.act_region_empty, e.profile.abstain_region_empty);
}

TEST(McOracle, GridAgreementAtModerateSampleSize) {
  // The full 10^6-sample grid runs in the acceptance binary; this is a
  // quicker version with a looser 4-SE band.
  for (Incentive r : {kNone, kOffered}) {
    for (int i = 0; i < 20; ++i) {
      const ParticipationRule rule{r, grid_t(i)};
      const BeliefProfile a = belief_profile(rule);
      const BeliefEstimate m = mc_oracle(rule, 100000, 1000 + static_cast<unsigned>(i) + 100 * as_int(r));
      const double k = 4.0;
      EXPECT_LE(std::abs(a.mass_act - m.profile.mass_act), k * m.se_mass + 1e-15);
      EXPECT_LE(std::abs(a.e_va_act - m.profile.e_va_act), k * m.se_va_act + 1e-15);
      EXPECT_LE(std::abs(a.e_va_abstain - m.profile.e_va_abstain), k * m.se_va_abstain + 1e-15);
      EXPECT_LE(std::abs(a.e_vv_act - m.profile.e_vv_act), k * m.se_vv_act + 1e-15);
      EXPECT_LE(std::abs(a.e_vv_abstain - m.profile.e_vv_abstain), k * m.se_vv_abstain + 1e-15);
      EXPECT_EQ(a.act_region_empty, m.profile.act_region_empty) << "t=" << rule.threshold;
      EXPECT_EQ(a.abstain_region_empty, m.profile.abstain_region_empty) << "t=" << rule.threshold;
    }
  }
}
