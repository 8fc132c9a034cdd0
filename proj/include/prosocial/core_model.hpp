#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "prosocial/error.hpp"
#include "prosocial/types.hpp"

namespace prosocial {

namespace detail {

inline void require_in(double x, double lo, double hi, std::string_view name) {
  if (!std::isfinite(x) || x < lo || x > hi) {
    throw ConfigError(std::string(name) + " = " + std::to_string(x) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace detail

/// Plain, unchecked parameter block. Becomes a ModelParams after validation.
struct ModelParamValues {
  double c = 0.5;
  int R = 0;
  double vis = 1.0;
  double pref_va = 1.0;
  double pref_vv = 1.0;
  double s_va = 0.0;
  double s_vv = 0.0;

  /// Sets a field by its external name (c, R, VIS, pref_va, pref_vv, S_va, S_vv).
  /// Returns false for an unknown name.
  bool set(std::string_view name, double value) {
    if (name == "c") c = value;
    else if (name == "R") {
      if (value != 0.0 && value != 1.0) throw ConfigError("R must be 0 or 1");
      R = static_cast<int>(value);
    } else if (name == "VIS") vis = value;
    else if (name == "pref_va") pref_va = value;
    else if (name == "pref_vv") pref_vv = value;
    else if (name == "S_va") s_va = value;
    else if (name == "S_vv") s_vv = value;
    else return false;
    return true;
  }

  double get(std::string_view name) const {
    if (name == "c") return c;
    if (name == "R") return R;
    if (name == "VIS") return vis;
    if (name == "pref_va") return pref_va;
    if (name == "pref_vv") return pref_vv;
    if (name == "S_va") return s_va;
    if (name == "S_vv") return s_vv;
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
  }
};

/// Population-level model constants. Immutable once constructed; every
/// range is checked on construction.
class ModelParams {
 public:
  ModelParams() : ModelParams(ModelParamValues{}) {}

  explicit ModelParams(const ModelParamValues& v) : v_(v) {
    detail::require_in(v.c, 0.0, 1.0, "c");
    if (v.R != 0 && v.R != 1) throw ConfigError("R must be 0 or 1");
    detail::require_in(v.vis, 0.0, 1.0, "VIS");
    detail::require_in(v.pref_va, 0.0, 1.0, "pref_va");
    detail::require_in(v.pref_vv, 0.0, 1.0, "pref_vv");
    detail::require_in(v.s_va, -1.0, 1.0, "S_va");
    detail::require_in(v.s_vv, -1.0, 1.0, "S_vv");
  }

  double c() const noexcept { return v_.c; }
  Incentive incentive() const noexcept { return v_.R == 1 ? Incentive::offered : Incentive::none; }
  int R() const noexcept { return v_.R; }
  double vis() const noexcept { return v_.vis; }
  double pref_va() const noexcept { return v_.pref_va; }
  double pref_vv() const noexcept { return v_.pref_vv; }
  double s_va() const noexcept { return v_.s_va; }
  double s_vv() const noexcept { return v_.s_vv; }

  const ModelParamValues& values() const noexcept { return v_; }

  ModelParams with(std::string_view name, double value) const {
    ModelParamValues v = v_;
    if (!v.set(name, value)) throw ConfigError("unknown parameter '" + std::string(name) + "'");
    return ModelParams(v);
  }

  /// Weight on the intrinsic belief gap in the acting condition: VIS * S_va * pref_va.
  double intrinsic_weight() const noexcept { return v_.vis * v_.s_va * v_.pref_va; }
  /// Weight on the extrinsic belief gap: VIS * S_vv * pref_vv.
  double extrinsic_weight() const noexcept { return v_.vis * v_.s_vv * v_.pref_vv; }

 private:
  ModelParamValues v_;
};

class Agent {
 public:
  Agent(double v_a, double v_v, std::optional<double> cost = std::nullopt)
      : v_a_(v_a), v_v_(v_v), cost_(cost) {
    detail::require_in(v_a, 0.0, 1.0, "v_a");
    detail::require_in(v_v, 0.0, 1.0, "v_v");
    if (cost) detail::require_in(*cost, 0.0, 1.0, "c_i");
  }

  double v_a() const noexcept { return v_a_; }
  double v_v() const noexcept { return v_v_; }
  const std::optional<double>& cost() const noexcept { return cost_; }

  double effective_cost(const ModelParams& params) const noexcept {
    return cost_.value_or(params.c());
  }

  friend bool operator==(const Agent&, const Agent&) = default;

 private:
  double v_a_;
  double v_v_;
  std::optional<double> cost_;
};

struct Decision {
  Action action = Action::abstain;
  double utility_act = 0.0;
  double utility_abstain = 0.0;

  bool acts() const noexcept { return action == Action::act; }
};

/// B * (v_a + v_v * R) - B * c_eff.
inline double direct_benefit(const Agent& agent, const ModelParams& params, Action b) noexcept {
  if (b == Action::abstain) return 0.0;
  return (agent.v_a() + agent.v_v() * params.R()) - agent.effective_cost(params);
}

/// VIS * [S_va * pref_va * E(v_a | R, B) + S_vv * pref_vv * E(v_v | R, B)].
inline double reputational_benefit(const ModelParams& params, const BeliefProfile& beliefs,
                                   Action b) {
  if (beliefs.incentive != params.incentive()) {
    throw ContractViolation("beliefs were computed for a different incentive regime");
  }
  return params.vis() * (params.s_va() * params.pref_va() * beliefs.expected(Motivation::intrinsic, b) +
                         params.s_vv() * params.pref_vv() * beliefs.expected(Motivation::extrinsic, b));
}

/// Utility-maximising action. Indifference resolves to acting.
inline Decision decide(const Agent& agent, const ModelParams& params, const BeliefProfile& beliefs) {
  Decision d;
  d.utility_act = direct_benefit(agent, params, Action::act) +
                  reputational_benefit(params, beliefs, Action::act);
  d.utility_abstain = direct_benefit(agent, params, Action::abstain) +
                      reputational_benefit(params, beliefs, Action::abstain);
  d.action = d.utility_act >= d.utility_abstain ? Action::act : Action::abstain;
  return d;
}

}  // namespace prosocial
