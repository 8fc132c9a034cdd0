#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "prosocial/core_model.hpp"
#include "prosocial/equilibrium.hpp"
#include "prosocial/error.hpp"
#include "prosocial/random.hpp"

namespace prosocial {

struct Population {
  std::vector<Agent> agents;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return agents.size(); }
};

/// n agents with v_a, v_v ~ U[0,1) drawn in that order from one stream.
inline Population sample_population(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("population size must be >= 1");
  Population pop;
  pop.seed = seed;
  pop.agents.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform();
    const double v = rng.uniform();
    pop.agents.emplace_back(a, v);
  }
  return pop;
}

/// side x side lattice over the unit square, one agent per cell, uniformly
/// jittered inside its cell. Used for the scatter panels.
inline Population lattice_population(std::size_t side, std::uint64_t seed) {
  if (side == 0) throw ConfigError("lattice side must be >= 1");
  Population pop;
  pop.seed = seed;
  pop.agents.reserve(side * side);
  Rng rng(seed);
  const double h = 1.0 / static_cast<double>(side);
  for (std::size_t j = 0; j < side; ++j) {
    for (std::size_t i = 0; i < side; ++i) {
      const double a = (static_cast<double>(i) + rng.uniform()) * h;
      const double v = (static_cast<double>(j) + rng.uniform()) * h;
      pop.agents.emplace_back(std::min(a, 1.0), std::min(v, 1.0));
    }
  }
  return pop;
}

struct AgentDecision {
  Agent agent;
  Decision decision;
};

struct GridSimulation {
  EquilibriumResult equilibrium;
  std::vector<AgentDecision> decisions;

  std::size_t actors() const noexcept {
    return static_cast<std::size_t>(std::count_if(decisions.begin(), decisions.end(),
                                                  [](const auto& d) { return d.decision.acts(); }));
  }

  double acting_fraction() const noexcept {
    return decisions.empty() ? 0.0 : static_cast<double>(actors()) / static_cast<double>(decisions.size());
  }
};

/// Solves beliefs once, then lets every agent decide against them. A
/// non-converged equilibrium is kept in the result and its best threshold
/// is still used.
inline GridSimulation simulate_grid(const ModelParams& params, const Population& population, BeliefMode mode,
                                    const SolverOptions& opt = {}) {
  GridSimulation sim;
  sim.equilibrium = solve_threshold(params, mode, opt);
  sim.decisions.reserve(population.size());
  for (const Agent& a : population.agents) {
    sim.decisions.push_back({a, decide(a, params, sim.equilibrium.beliefs)});
  }
  return sim;
}

/// Where the empirical decision boundary meets the v_a axis: the midpoint
/// between the highest-scoring abstainer and the lowest-scoring actor.
/// A side with no agents is replaced by the edge of the score range.
inline double fitted_boundary_intercept(const GridSimulation& sim, Incentive r) {
  const ParticipationRule shape{r, 0.0};
  double max_abstain = 0.0;
  double min_act = shape.score_max();
  for (const auto& d : sim.decisions) {
    const double s = shape.score(d.agent.v_a(), d.agent.v_v());
    if (d.decision.acts()) min_act = std::min(min_act, s);
    else max_abstain = std::max(max_abstain, s);
  }
  return 0.5 * (max_abstain + min_act);
}

inline const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names{"c", "S_vv", "S_va", "R", "VIS", "pref_va", "pref_vv"};
  return names;
}

struct SweepSpec {
  ModelParamValues base;
  /// Axis name and values; the last axis varies fastest.
  std::vector<std::pair<std::string, std::vector<double>>> axes;
  std::size_t population = 10000;
  std::uint64_t seed = 0;
  BeliefMode mode = BeliefMode::rational;
  SolverOptions solver;
  std::size_t max_cells = 1'000'000;
  /// 0 = one worker per hardware thread.
  unsigned threads = 0;
};

struct SweepCell {
  std::size_t index = 0;
  ModelParamValues point;
  double t_star = 0.0;
  double rate_analytic = 0.0;
  double rate_empirical = 0.0;
  bool converged = false;
  /// 4 * sqrt(p (1 - p) / n) at the analytic rate.
  double band = 0.0;

  bool within_band() const noexcept { return std::abs(rate_empirical - rate_analytic) <= band; }
};

inline std::size_t sweep_size(const SweepSpec& spec) {
  std::size_t total = 1;
  for (const auto& [name, values] : spec.axes) {
    if (values.empty()) throw ConfigError("sweep axis '" + name + "' is empty");
    if (total > spec.max_cells / values.size()) {
      throw ConfigError("sweep has more than " + std::to_string(spec.max_cells) + " cells");
    }
    total *= values.size();
  }
  return total;
}

inline ModelParamValues sweep_point(const SweepSpec& spec, std::size_t index) {
  ModelParamValues v = spec.base;
  for (auto it = spec.axes.rbegin(); it != spec.axes.rend(); ++it) {
    const auto& values = it->second;
    v.set(it->first, values[index % values.size()]);
    index /= values.size();
  }
  return v;
}

inline SweepCell evaluate_sweep_cell(const SweepSpec& spec, std::size_t index) {
  SweepCell cell;
  cell.index = index;
  cell.point = sweep_point(spec, index);
  const ModelParams params(cell.point);
  const Population pop = sample_population(spec.population, derive_seed(spec.seed, index));
  const GridSimulation sim = simulate_grid(params, pop, spec.mode, spec.solver);
  cell.t_star = sim.equilibrium.t_star;
  cell.rate_analytic = sim.equilibrium.participation_rate;
  cell.rate_empirical = sim.acting_fraction();
  cell.converged = sim.equilibrium.converged;
  const double p = cell.rate_analytic;
  cell.band = 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(spec.population));
  return cell;
}

/// Evaluates every cell of the cross product. Cell i uses population seed
/// derive_seed(spec.seed, i), so output is independent of worker count.
inline std::vector<SweepCell> sweep(const SweepSpec& spec) {
  if (spec.population == 0) throw ConfigError("sweep population must be >= 1");
  const auto& known = sweep_axis_names();
  for (std::size_t i = 0; i < spec.axes.size(); ++i) {
    const auto& name = spec.axes[i].first;
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw ConfigError("unknown sweep axis '" + name + "'");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.axes[j].first == name) throw ConfigError("duplicate sweep axis '" + name + "'");
    }
  }
  const std::size_t n = sweep_size(spec);
  for (std::size_t i = 0; i < n; ++i) static_cast<void>(ModelParams(sweep_point(spec, i)));

  std::vector<SweepCell> cells(n);
  unsigned workers = spec.threads != 0 ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) cells[i] = evaluate_sweep_cell(spec, i);
    return cells;
  }
  std::vector<std::future<void>> jobs;
  jobs.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < n; i += workers) cells[i] = evaluate_sweep_cell(spec, i);
    }));
  }
  for (auto& j : jobs) j.get();
  return cells;
}

}  // namespace prosocial
