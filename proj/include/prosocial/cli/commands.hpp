#pragma once

// Subcommand bodies. Each run_* function is a pure function of the config
// and seed and returns in-memory tables; execute() maps errors to exit
// codes and writes the tables plus a manifest atomically.

#include <Eigen/Core>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "prosocial/beliefs.hpp"
#include "prosocial/cli/config.hpp"
#include "prosocial/equilibrium.hpp"
#include "prosocial/error.hpp"
#include "prosocial/experiment.hpp"
#include "prosocial/io/table.hpp"
#include "prosocial/popsim.hpp"
#include "prosocial/stats/logistic.hpp"
#include "prosocial/synthsurvey.hpp"
#include "prosocial/version.hpp"

namespace prosocial::cli {

enum class ExitCode : int {
  ok = 0,
  io_error = 1,
  config_error = 2,
  convergence_failure = 3,
  statistical_degeneracy = 4,
  unattainable_target = 5,
  internal_error = 70,
};

inline std::string_view to_string(ExitCode c) noexcept {
  switch (c) {
    case ExitCode::ok: return "ok";
    case ExitCode::io_error: return "io_error";
    case ExitCode::config_error: return "config_error";
    case ExitCode::convergence_failure: return "convergence_failure";
    case ExitCode::statistical_degeneracy: return "statistical_degeneracy";
    case ExitCode::unattainable_target: return "unattainable_target";
    case ExitCode::internal_error: return "internal_error";
  }
  return "internal_error";
}

inline constexpr std::string_view kOutDirEnv = "PROSOCIAL_OUT_DIR";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"beliefs", "figure1", "sweep", "costs", "calibrate", "experiment"};
  return names;
}

struct OutputFile {
  std::string stem;
  io::Table table;
};

struct CommandResult {
  std::vector<OutputFile> files;
  ExitCode status = ExitCode::ok;
  std::vector<std::string> warnings;
};

inline std::uint64_t fnv1a64(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

namespace detail {

inline std::uint64_t require_seed(const RunConfig& cfg, std::string_view sub) {
  if (!cfg.seed) throw ConfigError(std::string(sub) + " is stochastic: give a seed in the config or with --seed");
  return *cfg.seed;
}

inline std::int64_t flag(bool b) noexcept { return b ? 1 : 0; }

}  // namespace detail

inline CommandResult run_beliefs(const RunConfig& cfg) {
  const std::uint64_t seed = detail::require_seed(cfg, "beliefs");
  io::Table t;
  t.schema = "beliefs/v1";
  t.columns = {"R", "t", "mass", "e_va_act", "e_va_abstain", "e_vv_act", "e_vv_abstain", "act_empty",
               "abstain_empty", "mc_mass", "mc_e_va_act", "mc_e_va_abstain", "mc_e_vv_act", "mc_e_vv_abstain",
               "se_mass", "se_va_act", "se_va_abstain", "se_vv_act", "se_vv_abstain", "gap_mass", "gap_va_act",
               "gap_va_abstain", "gap_vv_act", "gap_vv_abstain", "n_samples"};
  std::uint64_t row = 0;
  for (int r : cfg.beliefs.incentives) {
    for (double th : cfg.beliefs.thresholds) {
      const ParticipationRule rule{r == 1 ? Incentive::offered : Incentive::none, th};
      const BeliefProfile a = belief_profile(rule);
      const BeliefEstimate m = mc_oracle(rule, cfg.beliefs.samples, derive_seed(seed, row++));
      const BeliefProfile& b = m.profile;
      t.add_row({std::int64_t{r}, th, a.mass_act, a.e_va_act, a.e_va_abstain, a.e_vv_act, a.e_vv_abstain,
                 detail::flag(a.act_region_empty), detail::flag(a.abstain_region_empty), b.mass_act, b.e_va_act,
                 b.e_va_abstain, b.e_vv_act, b.e_vv_abstain, m.se_mass, m.se_va_act, m.se_va_abstain, m.se_vv_act,
                 m.se_vv_abstain, std::abs(a.mass_act - b.mass_act), std::abs(a.e_va_act - b.e_va_act),
                 std::abs(a.e_va_abstain - b.e_va_abstain), std::abs(a.e_vv_act - b.e_vv_act),
                 std::abs(a.e_vv_abstain - b.e_vv_abstain), static_cast<std::int64_t>(m.n_samples)});
    }
  }
  return {{{"beliefs", std::move(t)}}, ExitCode::ok, {}};
}

inline CommandResult run_figure1(const RunConfig& cfg) {
  const std::uint64_t seed = detail::require_seed(cfg, "figure1");
  const Figure1Config& f = cfg.figure1;
  const Population pop = lattice_population(f.lattice, seed);
  const Incentive r = f.R == 1 ? Incentive::offered : Incentive::none;

  CommandResult out;
  io::Table summary;
  summary.schema = "figure1_summary/v1";
  summary.columns = {"row", "col", "S_vv", "c", "R", "t_star", "participation_rate", "acting_fraction",
                     "boundary_intercept", "actors", "agents", "converged", "residual", "iterations"};
  for (std::size_t i = 0; i < f.s_vv.size(); ++i) {
    for (std::size_t j = 0; j < f.c.size(); ++j) {
      ModelParamValues v = cfg.params;
      v.R = f.R;
      v.s_vv = f.s_vv[i];
      v.c = f.c[j];
      const GridSimulation sim = simulate_grid(ModelParams(v), pop, cfg.mode, cfg.solver);
      const EquilibriumResult& eq = sim.equilibrium;
      if (!eq.converged) {
        out.status = ExitCode::convergence_failure;
        out.warnings.push_back("panel S_vv=" + io::format_double(v.s_vv) + ", c=" + io::format_double(v.c) +
                               " did not converge");
      }
      summary.add_row({static_cast<std::int64_t>(i + 1), static_cast<std::int64_t>(j + 1), v.s_vv, v.c,
                       std::int64_t{f.R}, eq.t_star, eq.participation_rate, sim.acting_fraction(),
                       fitted_boundary_intercept(sim, r), static_cast<std::int64_t>(sim.actors()),
                       static_cast<std::int64_t>(sim.decisions.size()), detail::flag(eq.converged), eq.residual,
                       std::int64_t{eq.iterations}});
      if (f.panels) {
        io::Table panel;
        panel.schema = "figure1_panel/v1";
        panel.columns = {"v_a", "v_v", "B"};
        panel.rows.reserve(sim.decisions.size());
        for (const auto& d : sim.decisions) {
          panel.rows.push_back({d.agent.v_a(), d.agent.v_v(), detail::flag(d.decision.acts())});
        }
        out.files.push_back(
            {"figure1_panel_r" + std::to_string(i + 1) + "_c" + std::to_string(j + 1), std::move(panel)});
      }
    }
  }
  out.files.insert(out.files.begin(), OutputFile{"figure1_summary", std::move(summary)});
  return out;
}

inline CommandResult run_sweep(const RunConfig& cfg) {
  SweepSpec spec;
  spec.base = cfg.params;
  spec.axes = cfg.sweep.axes;
  spec.population = cfg.sweep.population;
  spec.max_cells = cfg.sweep.max_cells;
  spec.mode = cfg.mode;
  spec.solver = cfg.solver;
  spec.threads = cfg.threads;
  // Validate axes before insisting on a seed so typos surface first.
  sweep_size(spec);
  spec.seed = detail::require_seed(cfg, "sweep");
  const auto cells = sweep(spec);

  CommandResult out;
  io::Table t;
  t.schema = "sweep/v1";
  t.columns = {"index"};
  for (const auto& name : sweep_axis_names()) t.columns.push_back(name);
  for (const char* c : {"t_star", "rate_analytic", "rate_empirical", "band", "within_band", "converged"}) {
    t.columns.emplace_back(c);
  }
  for (const auto& cell : cells) {
    std::vector<io::Cell> row{static_cast<std::int64_t>(cell.index)};
    for (const auto& name : sweep_axis_names()) {
      if (name == "R") row.emplace_back(std::int64_t{cell.point.R});
      else row.emplace_back(cell.point.get(name));
    }
    row.insert(row.end(), {cell.t_star, cell.rate_analytic, cell.rate_empirical, cell.band,
                           detail::flag(cell.within_band()), detail::flag(cell.converged)});
    t.add_row(std::move(row));
    if (!cell.converged) {
      out.status = ExitCode::convergence_failure;
      out.warnings.push_back("sweep cell " + std::to_string(cell.index) + " did not converge");
    }
  }
  out.files.push_back({"sweep", std::move(t)});
  return out;
}

inline CommandResult run_costs(const RunConfig& cfg) {
  io::Table t;
  t.schema = "costs/v1";
  t.columns = {"c", "intrinsic_cost", "extrinsic_cost"};
  for (const auto& p : reputational_cost_curve(cfg.costs.c)) t.add_row({p.c, p.intrinsic_cost, p.extrinsic_cost});
  return {{{"costs", std::move(t)}}, ExitCode::ok, {}};
}

inline CommandResult run_calibrate(const RunConfig& cfg) {
  const ModelParams base(cfg.params);
  CommandResult out;
  io::Table t;
  t.schema = "calibrate/v1";
  t.columns = {"target", "S_vv", "achieved_rate", "attainable_lo", "attainable_hi", "iterations", "status"};
  for (double target : cfg.calibrate.targets) {
    try {
      const CalibrationResult r = calibrate_norm(target, base, cfg.mode, 1e-13, cfg.solver);
      t.add_row({target, r.s_vv, r.achieved_rate, r.attainable_lo, r.attainable_hi, std::int64_t{r.iterations},
                 std::string("ok")});
    } catch (const UnattainableTargetError& e) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      t.add_row({target, nan, nan, e.attainable_lo(), e.attainable_hi(), std::int64_t{0}, std::string("unattainable")});
      out.status = ExitCode::unattainable_target;
      out.warnings.push_back(e.what());
    }
  }
  out.files.push_back({"calibrate", std::move(t)});
  return out;
}

struct ExperimentData {
  std::vector<CountrySpec> countries;
  std::vector<SurveyRow> rows;
};

inline ExperimentData experiment_data(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  if (e.input_countries) {
    return {countries_from_csv(io::parse_csv(io::read_file(*e.input_countries))),
            microdata_from_csv(io::parse_csv(io::read_file(*e.input_microdata)))};
  }
  const std::uint64_t seed = detail::require_seed(cfg, "experiment");
  ExperimentData d;
  d.countries = generate_countries(e.countries, e.country_settings, derive_seed(seed, 0));
  d.rows = generate_microdata(d.countries, e.rows_per_country, e.link, derive_seed(seed, 1), cfg.threads);
  return d;
}

inline CommandResult run_experiment(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  const ExperimentData data = experiment_data(cfg);
  const stats::DesignMatrix design = build_design(data.rows, data.countries, e.design);
  const Eigen::VectorXd y = donation_outcome(data.rows);
  stats::RegressionFit fit;
  try {
    fit = stats::logistic_fit(design, y);
  } catch (const SeparationError& err) {
    throw SeparationError(std::string(err.what()) +
                          "; raise experiment.rows_per_country or disable experiment.design.extrinsic_interaction");
  }

  CommandResult out;
  out.files.push_back({"countries", countries_table(data.countries)});
  out.files.push_back({"microdata", microdata_table(data.rows)});

  io::Table coef;
  coef.schema = "coefficients/v1";
  coef.columns = {"name", "estimate", "std_error", "z", "p_value"};
  for (std::size_t j = 0; j < fit.names.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    const double z = fit.estimates[k] / fit.std_errors[k];
    coef.add_row({fit.names[j], fit.estimates[k], fit.std_errors[k], z, 2.0 * stats::normal_sf(std::abs(z))});
  }
  out.files.push_back({"coefficients", std::move(coef)});

  const bool has_interaction =
      std::find(fit.names.begin(), fit.names.end(), kInteractionColumn) != fit.names.end();
  std::string dropped;
  for (const auto& name : fit.dropped) dropped += (dropped.empty() ? "" : ";") + name;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  io::Table summary;
  summary.schema = "fit_summary/v1";
  summary.columns = {"channel", "n", "countries", "log_likelihood", "converged", "iterations", "dropped",
                     "interaction", "interaction_se", "interaction_z"};
  summary.add_row({std::string(to_string(e.design.channel)), static_cast<std::int64_t>(fit.n),
                   static_cast<std::int64_t>(data.countries.size()), fit.log_likelihood, detail::flag(fit.converged),
                   std::int64_t{fit.iterations}, dropped, has_interaction ? fit.coef(kInteractionColumn) : nan,
                   has_interaction ? fit.se(kInteractionColumn) : nan,
                   has_interaction ? fit.z(kInteractionColumn) : nan});
  out.files.push_back({"fit_summary", std::move(summary)});
  if (!fit.converged) {
    out.status = ExitCode::convergence_failure;
    out.warnings.push_back("logistic fit did not converge");
  }

  // Margins along the norm axis for a woman with otherwise average covariates.
  std::map<std::string, double> profile = mean_profile(design, fit);
  if (profile.count("female")) profile["female"] = 1.0;
  io::Table margins;
  margins.schema = "margins/v1";
  margins.columns = {"incentive", "norm", "probability"};
  const auto fitted = [&](const std::string& name) {
    return std::find(fit.names.begin(), fit.names.end(), name) != fit.names.end();
  };
  for (double level : {0.0, 0.5, 1.0}) {
    std::map<std::string, double> p = profile;
    if (level == 0.5 && !fitted(kPartialColumn)) continue;
    if (level == 1.0 && !fitted(kFullColumn)) continue;
    if (fitted(kPartialColumn)) p[kPartialColumn] = level == 0.5 ? 1.0 : 0.0;
    if (fitted(kFullColumn)) p[kFullColumn] = level == 1.0 ? 1.0 : 0.0;
    const auto probs = stats::predictive_margin(fit, p, kNormColumn, e.margin_norms);
    for (std::size_t i = 0; i < probs.size(); ++i) margins.add_row({level, e.margin_norms[i], probs[i]});
  }
  out.files.push_back({"margins", std::move(margins)});
  return out;
}

inline CommandResult run_command(std::string_view sub, const RunConfig& cfg) {
  if (sub == "beliefs") return run_beliefs(cfg);
  if (sub == "figure1") return run_figure1(cfg);
  if (sub == "sweep") return run_sweep(cfg);
  if (sub == "costs") return run_costs(cfg);
  if (sub == "calibrate") return run_calibrate(cfg);
  if (sub == "experiment") return run_experiment(cfg);
  throw ConfigError("unknown subcommand '" + std::string(sub) + "'");
}

inline std::string eigen_version() {
  return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION);
}

/// Renders every table, then a manifest listing them, and writes all of it
/// under out_dir. Returns the manifest text.
inline std::string write_outputs(std::string_view sub, const RunConfig& cfg, const CommandResult& result,
                                 const std::filesystem::path& out_dir) {
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  std::vector<std::pair<std::filesystem::path, std::string>> rendered;
  for (const auto& f : result.files) {
    const std::string name = f.stem + std::string(io::extension(cfg.format));
    std::string text = io::render(f.table, cfg.format);
    nlohmann::ordered_json entry;
    entry["path"] = name;
    entry["schema"] = f.table.schema;
    entry["rows"] = f.table.rows.size();
    entry["fnv1a64"] = hex64(fnv1a64(text));
    files.push_back(std::move(entry));
    rendered.emplace_back(out_dir / name, std::move(text));
  }
  nlohmann::ordered_json m;
  m["schema"] = "manifest/v1";
  m["tool"] = kToolName;
  m["version"] = kVersion;
  m["subcommand"] = sub;
  m["seed"] = cfg.seed ? nlohmann::ordered_json(*cfg.seed) : nlohmann::ordered_json(nullptr);
  m["mode"] = to_string(cfg.mode);
  m["format"] = cfg.format == io::Format::csv ? "csv" : "json";
  m["config_fnv1a64"] = hex64(fnv1a64(cfg.canonical));
  m["libraries"] = {{"eigen", eigen_version()},
                    {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                          std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["status"] = to_string(result.status);
  m["files"] = std::move(files);
  const std::string manifest = m.dump(1) + "\n";
  for (const auto& [path, text] : rendered) io::write_file_atomic(path, text);
  io::write_file_atomic(out_dir / "manifest.json", manifest);
  return manifest;
}

/// Runs a subcommand end to end and maps failures onto exit codes.
inline ExitCode execute(std::string_view sub, const RunConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& err) {
  try {
    const CommandResult result = run_command(sub, cfg);
    write_outputs(sub, cfg, result, out_dir);
    for (const auto& w : result.warnings) err << "warning: " << w << "\n";
    return result.status;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return ExitCode::config_error;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return ExitCode::io_error;
  } catch (const DegenerateDataError& e) {
    err << "statistical degeneracy: " << e.what() << "\n";
    return ExitCode::statistical_degeneracy;
  } catch (const ConvergenceError& e) {
    err << "convergence failure: " << e.what() << "\n";
    return ExitCode::convergence_failure;
  } catch (const UnattainableTargetError& e) {
    err << "unattainable target: " << e.what() << "\n";
    return ExitCode::unattainable_target;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return ExitCode::io_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return ExitCode::internal_error;
  }
}

/// --out, then the environment variable, then the config's "out", then ".".
inline std::filesystem::path resolve_out_dir(const std::optional<std::string>& flag, const char* env,
                                             const RunConfig& cfg) {
  if (flag && !flag->empty()) return *flag;
  if (env && *env) return env;
  if (cfg.out) return *cfg.out;
  return ".";
}

}  // namespace prosocial::cli
