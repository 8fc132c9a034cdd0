#pragma once

namespace prosocial {

enum class Incentive : int { none = 0, offered = 1 };

enum class Action : int { abstain = 0, act = 1 };

/// Which latent coordinate an observer forms an expectation about.
enum class Motivation { intrinsic, extrinsic };

inline constexpr int as_int(Incentive r) noexcept { return static_cast<int>(r); }
inline constexpr int as_int(Action b) noexcept { return static_cast<int>(b); }

/// How an expectation is assigned to a region of zero measure.
enum class OffPathBelief {
  /// The prior mean 0.5: observers learn nothing from an impossible action.
  prior_mean,
  /// The limit of the conditional mean as the region shrinks to its
  /// boundary point. Keeps belief gaps continuous in the threshold.
  limit,
};

/// Observer expectations of (v_a, v_v) conditional on the action, for one
/// incentive regime.
struct BeliefProfile {
  Incentive incentive = Incentive::none;
  double e_va_act = 0.5;
  double e_va_abstain = 0.5;
  double e_vv_act = 0.5;
  double e_vv_abstain = 0.5;
  double mass_act = 1.0;
  bool act_region_empty = false;
  bool abstain_region_empty = false;

  double expected(Motivation which, Action b) const noexcept {
    if (which == Motivation::intrinsic) return b == Action::act ? e_va_act : e_va_abstain;
    return b == Action::act ? e_vv_act : e_vv_abstain;
  }

  /// E(x | act) - E(x | abstain).
  double gap(Motivation which) const noexcept {
    return expected(which, Action::act) - expected(which, Action::abstain);
  }

  bool degenerate() const noexcept { return act_region_empty || abstain_region_empty; }
};

}  // namespace prosocial
