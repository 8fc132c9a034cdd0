#pragma once

// Observer beliefs about (v_a, v_v) ~ U[0,1]^2 given a threshold
// participation rule. The analytic profile comes from unit-square geometry:
// a uniform tail when no incentive is offered, a triangle/trapezoid split of
// the square along v_a + v_v = t when one is.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "prosocial/error.hpp"
#include "prosocial/random.hpp"
#include "prosocial/types.hpp"

namespace prosocial {

/// Acting region: v_a >= t without an incentive, v_a + v_v >= t with one.
struct ParticipationRule {
  Incentive incentive = Incentive::none;
  double threshold = 0.0;

  /// Largest score an agent can have: 1 for v_a, 2 for v_a + v_v.
  double score_max() const noexcept { return incentive == Incentive::offered ? 2.0 : 1.0; }

  double score(double v_a, double v_v) const noexcept {
    return incentive == Incentive::offered ? v_a + v_v : v_a;
  }

  bool acts(double v_a, double v_v) const noexcept { return score(v_a, v_v) >= threshold; }
};

inline double participation_mass(const ParticipationRule& rule) noexcept {
  const double t = rule.threshold;
  if (rule.incentive == Incentive::none) return std::clamp(1.0 - t, 0.0, 1.0);
  if (t <= 0.0) return 1.0;
  if (t >= 2.0) return 0.0;
  if (t <= 1.0) return 1.0 - 0.5 * t * t;
  const double s = 2.0 - t;
  return 0.5 * s * s;
}

namespace detail {

struct RegionMeans {
  double act;
  double abstain;
};

// Conditional means of the informative coordinate(s), evaluated at the
// threshold clamped into [0, score_max]. At the clamp points these are the
// limits of the conditional means as the vanishing region shrinks.
inline RegionMeans informative_means(const ParticipationRule& rule) noexcept {
  if (rule.incentive == Incentive::none) {
    const double t = std::clamp(rule.threshold, 0.0, 1.0);
    return {0.5 * (1.0 + t), 0.5 * t};
  }
  const double t = std::clamp(rule.threshold, 0.0, 2.0);
  if (t <= 1.0) {
    // abstainers fill the lower-left triangle with legs t, centroid t/3
    const double area = 0.5 * t * t;
    const double mean_abstain = t / 3.0;
    return {(0.5 - area * mean_abstain) / (1.0 - area), mean_abstain};
  }
  // actors fill the upper-right triangle with legs 2 - t
  const double s = 2.0 - t;
  const double area = 0.5 * s * s;
  const double mean_act = 1.0 - s / 3.0;
  return {mean_act, (0.5 - area * mean_act) / (1.0 - area)};
}

}  // namespace detail

inline BeliefProfile belief_profile(const ParticipationRule& rule,
                                    OffPathBelief off_path = OffPathBelief::prior_mean) {
  BeliefProfile p;
  p.incentive = rule.incentive;
  p.mass_act = participation_mass(rule);
  p.act_region_empty = p.mass_act <= 0.0;
  p.abstain_region_empty = p.mass_act >= 1.0;

  const auto m = detail::informative_means(rule);
  p.e_va_act = m.act;
  p.e_va_abstain = m.abstain;
  if (rule.incentive == Incentive::offered) {
    // the rule is symmetric in (v_a, v_v)
    p.e_vv_act = m.act;
    p.e_vv_abstain = m.abstain;
  } else {
    p.e_vv_act = 0.5;
    p.e_vv_abstain = 0.5;
  }

  if (off_path == OffPathBelief::prior_mean) {
    if (p.act_region_empty) p.e_va_act = p.e_vv_act = 0.5;
    if (p.abstain_region_empty) p.e_va_abstain = p.e_vv_abstain = 0.5;
  }
  return p;
}

inline double expected_motivation(const ParticipationRule& rule, Motivation which, Action b,
                                  OffPathBelief off_path = OffPathBelief::prior_mean) {
  return belief_profile(rule, off_path).expected(which, b);
}

/// Monte Carlo estimate of a belief profile with per-field standard errors.
/// Empty regions are flagged and carry the prior mean with zero error.
struct BeliefEstimate {
  BeliefProfile profile;
  double se_mass = 0.0;
  double se_va_act = 0.0;
  double se_va_abstain = 0.0;
  double se_vv_act = 0.0;
  double se_vv_abstain = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_act = 0;
  std::uint64_t n_abstain = 0;
};

inline BeliefEstimate mc_oracle(const ParticipationRule& rule, std::uint64_t n_samples,
                                std::uint64_t seed) {
  if (n_samples == 0) throw ConfigError("mc_oracle: n_samples must be >= 1");

  struct Moments {
    std::uint64_t n = 0;
    double sum_a = 0, sum_aa = 0, sum_v = 0, sum_vv = 0;

    void add(double a, double v) noexcept {
      ++n;
      sum_a += a;
      sum_aa += a * a;
      sum_v += v;
      sum_vv += v * v;
    }
    static double mean(double s, std::uint64_t k) noexcept { return s / static_cast<double>(k); }
    static double se(double s, double ss, std::uint64_t k) noexcept {
      if (k < 2) return 0.0;
      const double kk = static_cast<double>(k);
      const double var = std::max(0.0, (ss - s * s / kk) / (kk - 1.0));
      return std::sqrt(var / kk);
    }
  };

  Rng rng(seed);
  Moments act, abstain;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const double a = rng.uniform();
    const double v = rng.uniform();
    (rule.acts(a, v) ? act : abstain).add(a, v);
  }

  BeliefEstimate e;
  e.n_samples = n_samples;
  e.n_act = act.n;
  e.n_abstain = abstain.n;
  BeliefProfile& p = e.profile;
  p.incentive = rule.incentive;
  const double n = static_cast<double>(n_samples);
  p.mass_act = static_cast<double>(act.n) / n;
  e.se_mass = std::sqrt(p.mass_act * (1.0 - p.mass_act) / n);
  p.act_region_empty = act.n == 0;
  p.abstain_region_empty = abstain.n == 0;
  if (act.n > 0) {
    p.e_va_act = Moments::mean(act.sum_a, act.n);
    p.e_vv_act = Moments::mean(act.sum_v, act.n);
    e.se_va_act = Moments::se(act.sum_a, act.sum_aa, act.n);
    e.se_vv_act = Moments::se(act.sum_v, act.sum_vv, act.n);
  }
  if (abstain.n > 0) {
    p.e_va_abstain = Moments::mean(abstain.sum_a, abstain.n);
    p.e_vv_abstain = Moments::mean(abstain.sum_v, abstain.n);
    e.se_va_abstain = Moments::se(abstain.sum_a, abstain.sum_aa, abstain.n);
    e.se_vv_abstain = Moments::se(abstain.sum_v, abstain.sum_vv, abstain.n);
  }
  return e;
}

}  // namespace prosocial
