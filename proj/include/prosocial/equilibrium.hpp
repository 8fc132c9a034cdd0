#pragma once

// Self-consistent participation thresholds.
//
// An agent acts iff score >= c - w_a * gap_a(t) - w_v * gap_v(t), where
// score is v_a (no incentive) or v_a + v_v (incentive), w_x are the
// VIS * S_x * pref_x weights and gap_x(t) = E(x | act) - E(x | abstain)
// under the rule with threshold t. A rational equilibrium is a fixed point
// t* = rhs(t*). Naive observers form beliefs at the reputation-free
// threshold t = c instead.
//
// Thresholds outside [0, score_max] describe "everyone acts" or "nobody
// acts". Beliefs about the empty side are taken as the limit of the
// conditional mean, so rhs is continuous and constant beyond the square.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "prosocial/beliefs.hpp"
#include "prosocial/core_model.hpp"
#include "prosocial/error.hpp"

namespace prosocial {

enum class BeliefMode { rational, naive };

inline std::string_view to_string(BeliefMode m) noexcept {
  return m == BeliefMode::rational ? "rational" : "naive";
}

inline BeliefMode parse_belief_mode(std::string_view s) {
  if (s == "rational") return BeliefMode::rational;
  if (s == "naive") return BeliefMode::naive;
  throw ConfigError("mode must be 'rational' or 'naive', got '" + std::string(s) + "'");
}

struct SolverOptions {
  double damping = 0.5;
  int max_iterations = 10000;
  double tolerance = 1e-10;
  int scan_points = 512;
  // iterations without a new best residual before switching to bisection
  int stall_window = 200;
};

enum class SolveMethod { direct, damped_iteration, bisection };

struct EquilibriumResult {
  double t_star = 0.0;
  /// Beliefs agents respond to: at t_star for rational observers, at the
  /// reputation-free threshold c for naive ones.
  BeliefProfile beliefs;
  double participation_rate = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  BeliefMode mode = BeliefMode::rational;
  SolveMethod method = SolveMethod::direct;
  /// Every root located by the scan (rational mode). Size > 1 means
  /// multiple equilibria; t_star is then the root nearest to c.
  std::vector<double> roots;
  /// Interval known to contain a root, or the scan range when none was found.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;

  ParticipationRule rule(Incentive r) const noexcept { return {r, t_star}; }
};

/// Beliefs at threshold t with limiting off-path expectations.
inline BeliefProfile equilibrium_beliefs(Incentive r, double t) {
  return belief_profile(ParticipationRule{r, t}, OffPathBelief::limit);
}

/// Acting threshold implied by observers holding the beliefs of rule t.
inline double threshold_rhs(const ModelParams& params, double t) {
  const BeliefProfile b = equilibrium_beliefs(params.incentive(), t);
  return params.c() - (params.intrinsic_weight() * b.gap(Motivation::intrinsic) +
                       params.extrinsic_weight() * b.gap(Motivation::extrinsic));
}

namespace detail {

struct Bracket {
  double lo, hi, d_lo, d_hi;
};

inline double bisect_defect(const ModelParams& params, Bracket b, double tol, int& evaluations) {
  auto defect = [&](double t) { return t - threshold_rhs(params, t); };
  double best_t = std::abs(b.d_lo) <= std::abs(b.d_hi) ? b.lo : b.hi;
  double best_d = std::min(std::abs(b.d_lo), std::abs(b.d_hi));
  for (int i = 0; i < 200 && best_d > 0.25 * tol; ++i) {
    const double mid = 0.5 * (b.lo + b.hi);
    if (mid <= b.lo || mid >= b.hi) break;
    const double d = defect(mid);
    ++evaluations;
    if (std::abs(d) < best_d) {
      best_d = std::abs(d);
      best_t = mid;
    }
    if ((d < 0.0) == (b.d_lo < 0.0)) {
      b.lo = mid;
      b.d_lo = d;
    } else {
      b.hi = mid;
      b.d_hi = d;
    }
  }
  return best_t;
}

}  // namespace detail

inline EquilibriumResult solve_threshold(const ModelParams& params, BeliefMode mode,
                                         const SolverOptions& opt = {}) {
  const Incentive r = params.incentive();
  const double c = params.c();
  EquilibriumResult res;
  res.mode = mode;

  auto finish = [&](double t, double residual) {
    res.t_star = t;
    res.residual = residual;
    res.converged = residual <= opt.tolerance;
    res.participation_rate = participation_mass({r, t});
    if (mode == BeliefMode::rational) res.beliefs = equilibrium_beliefs(r, t);
    return res;
  };

  if (mode == BeliefMode::naive) {
    res.beliefs = equilibrium_beliefs(r, c);
    const double t = threshold_rhs(params, c);
    res.bracket_lo = res.bracket_hi = t;
    res.method = SolveMethod::direct;
    return finish(t, 0.0);
  }

  auto defect = [&](double t) { return t - threshold_rhs(params, t); };

  // Scan for sign changes of the defect so that multiple equilibria are seen.
  const double lo = std::min(0.0, c - 2.0);
  const double hi = std::max(2.0, c + 2.0);
  const int n = std::max(2, opt.scan_points);
  std::vector<detail::Bracket> brackets;
  double prev_t = lo;
  double prev_d = defect(lo);
  for (int i = 1; i < n; ++i) {
    const double t = lo + (hi - lo) * i / (n - 1);
    const double d = defect(t);
    if (prev_d == 0.0) {
      brackets.push_back({prev_t, prev_t, 0.0, 0.0});
    } else if ((prev_d < 0.0) != (d < 0.0) && d != 0.0) {
      brackets.push_back({prev_t, t, prev_d, d});
    }
    prev_t = t;
    prev_d = d;
  }
  if (prev_d == 0.0) brackets.push_back({prev_t, prev_t, 0.0, 0.0});
  res.iterations = n;

  if (brackets.empty()) {
    res.bracket_lo = lo;
    res.bracket_hi = hi;
  } else {
    res.bracket_lo = brackets.front().lo;
    res.bracket_hi = brackets.front().hi;
  }

  if (brackets.size() > 1) {
    for (const auto& b : brackets) {
      res.roots.push_back(detail::bisect_defect(params, b, opt.tolerance, res.iterations));
    }
    const auto nearest = std::min_element(res.roots.begin(), res.roots.end(), [&](double a, double b) {
      return std::abs(a - c) < std::abs(b - c);
    });
    const auto& chosen = brackets[static_cast<std::size_t>(nearest - res.roots.begin())];
    res.bracket_lo = chosen.lo;
    res.bracket_hi = chosen.hi;
    res.method = SolveMethod::bisection;
    return finish(*nearest, std::abs(defect(*nearest)));
  }

  // Damped fixed-point iteration from the reputation-free threshold.
  double t = c;
  double best_t = t;
  double best_residual = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int k = 0; k < opt.max_iterations; ++k) {
    const double rhs = threshold_rhs(params, t);
    const double residual = std::abs(t - rhs);
    ++res.iterations;
    if (residual < best_residual) {
      best_residual = residual;
      best_t = t;
      since_best = 0;
    } else if (++since_best >= opt.stall_window) {
      break;
    }
    if (residual <= opt.tolerance) break;
    t = (1.0 - opt.damping) * t + opt.damping * rhs;
  }
  res.method = SolveMethod::damped_iteration;

  if (best_residual > opt.tolerance && !brackets.empty()) {
    const double tb = detail::bisect_defect(params, brackets.front(), opt.tolerance, res.iterations);
    const double rb = std::abs(defect(tb));
    res.method = SolveMethod::bisection;
    if (rb < best_residual) {
      best_t = tb;
      best_residual = rb;
    }
  }
  res.roots.push_back(best_t);
  return finish(best_t, best_residual);
}

/// Incentive-induced reputational penalties at the reputation-free threshold
/// t = c, as non-negative magnitudes. The signed differences plotted in the
/// usual presentation are the negations of these.
struct ReputationCostPoint {
  double c = 0.0;
  /// [gap_a without incentive] - [gap_a with incentive]
  double intrinsic_cost = 0.0;
  /// gap_v with incentive
  double extrinsic_cost = 0.0;
};

inline ReputationCostPoint reputational_cost(double c) {
  detail::require_in(c, 0.0, 1.0, "c");
  const BeliefProfile without = equilibrium_beliefs(Incentive::none, c);
  const BeliefProfile with = equilibrium_beliefs(Incentive::offered, c);
  return {c, without.gap(Motivation::intrinsic) - with.gap(Motivation::intrinsic),
          with.gap(Motivation::extrinsic)};
}

inline std::vector<ReputationCostPoint> reputational_cost_curve(const std::vector<double>& c_grid) {
  std::vector<ReputationCostPoint> out;
  out.reserve(c_grid.size());
  for (double c : c_grid) out.push_back(reputational_cost(c));
  return out;
}

struct CalibrationResult {
  double s_vv = 0.0;
  double achieved_rate = 0.0;
  double attainable_lo = 0.0;
  double attainable_hi = 0.0;
  int iterations = 0;
};

/// Finds S_vv in [-1, 1] whose equilibrium participation rate equals
/// target_rate. The S_vv stored in `params` is ignored.
inline CalibrationResult calibrate_norm(double target_rate, const ModelParams& params, BeliefMode mode,
                                        double s_tolerance = 1e-13, const SolverOptions& opt = {}) {
  if (!(target_rate > 0.0 && target_rate < 1.0)) {
    throw ConfigError("calibrate_norm: target_rate must lie in (0, 1)");
  }
  auto rate_at = [&](double s) {
    const EquilibriumResult r = solve_threshold(params.with("S_vv", s), mode, opt);
    if (!r.converged) throw ConvergenceError("calibrate_norm: equilibrium did not converge");
    return r.participation_rate;
  };

  CalibrationResult out;
  out.attainable_lo = rate_at(-1.0);
  out.attainable_hi = rate_at(1.0);
  if (target_rate < out.attainable_lo || target_rate > out.attainable_hi) {
    throw UnattainableTargetError("target rate " + std::to_string(target_rate) +
                                      " outside attainable interval [" +
                                      std::to_string(out.attainable_lo) + ", " +
                                      std::to_string(out.attainable_hi) + "]",
                                  out.attainable_lo, out.attainable_hi);
  }

  double lo = -1.0, hi = 1.0;
  double best_s = 0.0, best_gap = std::numeric_limits<double>::infinity(), best_rate = 0.0;
  while (hi - lo > s_tolerance && out.iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    const double rate = rate_at(mid);
    ++out.iterations;
    if (std::abs(rate - target_rate) < best_gap) {
      best_gap = std::abs(rate - target_rate);
      best_s = mid;
      best_rate = rate;
    }
    if (rate < target_rate) lo = mid;
    else hi = mid;
  }
  out.s_vv = best_s;
  out.achieved_rate = best_rate;
  return out;
}

}  // namespace prosocial
