#pragma once

// Run configuration: one JSON document, every object checked against a
// fixed key list so a misspelt parameter name is an error, not a default.
//
//   {
//     "seed": 42, "format": "csv", "out": "results", "mode": "rational",
//     "threads": 0,
//     "params":     {"c": 0.5, "R": 1, "VIS": 1, "pref_va": 1, "pref_vv": 1, "S_va": 0, "S_vv": 0},
//     "solver":     {"damping": 0.5, "max_iterations": 10000, "tolerance": 1e-10, "scan_points": 512},
//     "beliefs":    {"thresholds": GRID, "R": [0, 1], "samples": 1000000},
//     "figure1":    {"S_vv": GRID, "c": GRID, "R": 1, "lattice": 200, "panels": true},
//     "sweep":      {"axes": [{"name": "c", "values": GRID}], "population": 10000, "max_cells": 1000000},
//     "costs":      {"c": GRID},
//     "calibrate":  {"targets": GRID},
//     "experiment": {...}
//   }
//
// GRID is either an array of numbers or {"start": a, "stop": b, "step": h}
// (inclusive of b up to rounding).

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "prosocial/core_model.hpp"
#include "prosocial/equilibrium.hpp"
#include "prosocial/error.hpp"
#include "prosocial/experiment.hpp"
#include "prosocial/io/table.hpp"
#include "prosocial/popsim.hpp"
#include "prosocial/synthsurvey.hpp"

namespace prosocial::cli {

using json = nlohmann::json;

struct BeliefsConfig {
  std::vector<double> thresholds;
  std::vector<int> incentives{0, 1};
  std::uint64_t samples = 1'000'000;
};

struct Figure1Config {
  std::vector<double> s_vv{-1.0, 0.0, 1.0};
  std::vector<double> c{0.2, 0.4, 0.6, 0.8};
  int R = 1;
  std::size_t lattice = 200;
  bool panels = true;
};

struct SweepConfig {
  std::vector<std::pair<std::string, std::vector<double>>> axes{{"R", {0.0, 1.0}}, {"c", {0.2, 0.4, 0.6, 0.8}}};
  std::size_t population = 10000;
  std::size_t max_cells = 1'000'000;
};

struct CostsConfig {
  std::vector<double> c;
};

struct CalibrateConfig {
  std::vector<double> targets{0.7, 0.8, 0.9, 0.95};
};

struct ExperimentConfig {
  std::size_t countries = 28;
  std::size_t rows_per_country = 1000;
  CountrySettings country_settings;
  LinkSettings link;
  DesignOptions design;
  std::vector<double> margin_norms;
  std::optional<std::filesystem::path> input_countries;
  std::optional<std::filesystem::path> input_microdata;
};

struct RunConfig {
  std::optional<std::uint64_t> seed;
  io::Format format = io::Format::csv;
  std::optional<std::filesystem::path> out;
  BeliefMode mode = BeliefMode::rational;
  unsigned threads = 0;
  ModelParamValues params;
  SolverOptions solver;
  BeliefsConfig beliefs;
  Figure1Config figure1;
  SweepConfig sweep;
  CostsConfig costs;
  CalibrateConfig calibrate;
  ExperimentConfig experiment;
  /// Compact, key-sorted dump of the parsed document; hashed into the manifest.
  std::string canonical = "{}";
};

namespace detail {

inline std::vector<double> inclusive_range(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("grid step must be positive");
  if (stop < start) throw ConfigError("grid stop is below start");
  const double span = (stop - start) / step;
  const auto n = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  if (n > 10'000'000) throw ConfigError("grid has too many points");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = start + static_cast<double>(i) * step;
  // Kill representation noise such as 0.30000000000000004.
  for (double& v : out) v = std::round(v * 1e12) / 1e12;
  return out;
}

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) throw ConfigError(path_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) throw ConfigError(path(key) + ": expected a number");
    out = v.get<double>();
  }

  template <class Int>
  void integer(const char* key, Int& out) const {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_integer()) throw ConfigError(path(key) + ": expected an integer");
    if constexpr (std::is_unsigned_v<Int>) {
      if (!v.is_number_unsigned()) throw ConfigError(path(key) + ": expected a non-negative integer");
      out = static_cast<Int>(v.get<std::uint64_t>());
    } else {
      out = static_cast<Int>(v.get<std::int64_t>());
    }
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    if (!at(key).is_boolean()) throw ConfigError(path(key) + ": expected true or false");
    out = at(key).get<bool>();
  }

  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    if (!at(key).is_string()) throw ConfigError(path(key) + ": expected a string");
    out = at(key).get<std::string>();
  }

  void grid(const char* key, std::vector<double>& out) const {
    if (!has(key)) return;
    out = parse_grid(at(key), path(key));
  }

  static std::vector<double> parse_grid(const json& v, const std::string& where) {
    if (v.is_array()) {
      std::vector<double> out;
      for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + ": grid entries must be numbers");
        out.push_back(x.get<double>());
      }
      if (out.empty()) throw ConfigError(where + ": grid is empty");
      return out;
    }
    if (v.is_object()) {
      const Reader r(v, where);
      r.allow({"start", "stop", "step"});
      if (!r.has("start") || !r.has("stop") || !r.has("step")) {
        throw ConfigError(where + ": range grid needs start, stop and step");
      }
      double start = 0, stop = 0, step = 0;
      r.number("start", start);
      r.number("stop", stop);
      r.number("step", step);
      try {
        return inclusive_range(start, stop, step);
      } catch (const ConfigError& e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
    throw ConfigError(where + ": expected an array or {start, stop, step}");
  }

 private:
  const json& j_;
  std::string path_;
};

inline void read_params(const Reader& r, ModelParamValues& p) {
  r.allow({"c", "R", "VIS", "pref_va", "pref_vv", "S_va", "S_vv"});
  r.number("c", p.c);
  r.integer("R", p.R);
  r.number("VIS", p.vis);
  r.number("pref_va", p.pref_va);
  r.number("pref_vv", p.pref_vv);
  r.number("S_va", p.s_va);
  r.number("S_vv", p.s_vv);
  static_cast<void>(ModelParams(p));
}

inline void read_solver(const Reader& r, SolverOptions& s) {
  r.allow({"damping", "max_iterations", "tolerance", "scan_points"});
  r.number("damping", s.damping);
  r.integer("max_iterations", s.max_iterations);
  r.number("tolerance", s.tolerance);
  r.integer("scan_points", s.scan_points);
  if (!(s.damping > 0.0 && s.damping <= 1.0)) throw ConfigError("solver.damping must lie in (0, 1]");
  if (s.max_iterations < 1) throw ConfigError("solver.max_iterations must be >= 1");
  if (!(s.tolerance > 0.0)) throw ConfigError("solver.tolerance must be positive");
  if (s.scan_points < 2) throw ConfigError("solver.scan_points must be >= 2");
}

inline void read_beliefs(const Reader& r, BeliefsConfig& b) {
  r.allow({"thresholds", "R", "samples"});
  r.grid("thresholds", b.thresholds);
  if (r.has("R")) {
    b.incentives.clear();
    for (double x : Reader::parse_grid(r.at("R"), r.path("R"))) {
      if (x != 0.0 && x != 1.0) throw ConfigError(r.path("R") + ": entries must be 0 or 1");
      b.incentives.push_back(static_cast<int>(x));
    }
  }
  r.integer("samples", b.samples);
  if (b.samples == 0) throw ConfigError("beliefs.samples must be >= 1");
}

inline void read_figure1(const Reader& r, Figure1Config& f) {
  r.allow({"S_vv", "c", "R", "lattice", "panels"});
  r.grid("S_vv", f.s_vv);
  r.grid("c", f.c);
  r.integer("R", f.R);
  r.integer("lattice", f.lattice);
  r.boolean("panels", f.panels);
  if (f.R != 0 && f.R != 1) throw ConfigError("figure1.R must be 0 or 1");
  if (f.lattice == 0 || f.lattice > 4000) throw ConfigError("figure1.lattice must lie in [1, 4000]");
}

inline void read_sweep(const Reader& r, SweepConfig& s) {
  r.allow({"axes", "population", "max_cells"});
  if (r.has("axes")) {
    const json& axes = r.at("axes");
    if (!axes.is_array() || axes.empty()) throw ConfigError(r.path("axes") + ": expected a non-empty array");
    s.axes.clear();
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const Reader a(axes[k], r.path("axes") + "[" + std::to_string(k) + "]");
      a.allow({"name", "values"});
      std::string name;
      a.string("name", name);
      if (name.empty()) throw ConfigError(a.path("name") + ": axis name required");
      if (!a.has("values")) throw ConfigError(a.path("values") + ": axis values required");
      std::vector<double> values;
      a.grid("values", values);
      s.axes.emplace_back(name, std::move(values));
    }
  }
  r.integer("population", s.population);
  r.integer("max_cells", s.max_cells);
  if (s.population == 0) throw ConfigError("sweep.population must be >= 1");
}

inline void read_shares(const Reader& r, RegimeShares& s) {
  r.allow({"full", "partial"});
  r.number("full", s.full);
  r.number("partial", s.partial);
}

inline void read_experiment(const Reader& r, ExperimentConfig& e) {
  r.allow({"countries", "rows_per_country", "channel", "norm_fin", "norm_time", "cost_mean", "shares_fin",
           "shares_time", "link", "design", "margin_norms", "input_countries", "input_microdata"});
  r.integer("countries", e.countries);
  r.integer("rows_per_country", e.rows_per_country);
  if (r.has("channel")) {
    std::string ch;
    r.string("channel", ch);
    e.link.channel = parse_channel(ch);
    e.design.channel = e.link.channel;
  }
  auto pair = [&](const char* key, double& lo, double& hi) {
    if (!r.has(key)) return;
    const auto v = Reader::parse_grid(r.at(key), r.path(key));
    if (v.size() != 2) throw ConfigError(r.path(key) + ": expected [lo, hi]");
    lo = v[0];
    hi = v[1];
  };
  pair("norm_fin", e.country_settings.norm_fin_lo, e.country_settings.norm_fin_hi);
  pair("norm_time", e.country_settings.norm_time_lo, e.country_settings.norm_time_hi);
  pair("cost_mean", e.country_settings.cost_mean_lo, e.country_settings.cost_mean_hi);
  if (r.has("shares_fin")) read_shares(Reader(r.at("shares_fin"), r.path("shares_fin")), e.country_settings.fin);
  if (r.has("shares_time")) read_shares(Reader(r.at("shares_time"), r.path("shares_time")), e.country_settings.time);
  if (r.has("link")) {
    const Reader l(r.at("link"), r.path("link"));
    l.allow({"VIS", "pref_va", "pref_vv", "S_va", "partial_vis_factor", "cost_spread", "intrinsic_cutoff",
             "extrinsic_cutoff"});
    l.number("VIS", e.link.vis);
    l.number("pref_va", e.link.pref_va);
    l.number("pref_vv", e.link.pref_vv);
    l.number("S_va", e.link.s_va);
    l.number("partial_vis_factor", e.link.partial_vis_factor);
    l.number("cost_spread", e.link.cost_spread);
    l.number("intrinsic_cutoff", e.link.intrinsic_cutoff);
    l.number("extrinsic_cutoff", e.link.extrinsic_cutoff);
  }
  if (r.has("design")) {
    const Reader d(r.at("design"), r.path("design"));
    d.allow({"country_indicators", "extrinsic_interaction"});
    d.boolean("country_indicators", e.design.country_indicators);
    d.boolean("extrinsic_interaction", e.design.extrinsic_interaction);
  }
  r.grid("margin_norms", e.margin_norms);
  std::string path;
  r.string("input_countries", path);
  if (!path.empty()) e.input_countries = path;
  path.clear();
  r.string("input_microdata", path);
  if (!path.empty()) e.input_microdata = path;
  if (e.input_countries.has_value() != e.input_microdata.has_value()) {
    throw ConfigError("experiment: input_countries and input_microdata must be given together");
  }
  if (e.countries < 2) throw ConfigError("experiment.countries must be >= 2");
  if (e.rows_per_country == 0) throw ConfigError("experiment.rows_per_country must be >= 1");
}

}  // namespace detail

inline io::Format parse_format(const std::string& s) {
  if (s == "csv") return io::Format::csv;
  if (s == "json") return io::Format::json;
  throw ConfigError("format must be 'csv' or 'json', got '" + s + "'");
}

inline RunConfig default_config() {
  RunConfig cfg;
  cfg.params.R = 1;
  cfg.beliefs.thresholds = detail::inclusive_range(0.0, 1.9, 0.1);
  cfg.costs.c = detail::inclusive_range(0.05, 0.95, 0.05);
  cfg.experiment.margin_norms = detail::inclusive_range(0.0, 1.0, 0.05);
  return cfg;
}

/// Parses a config document. Relative input paths resolve against `base_dir`.
inline RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg = default_config();
  const detail::Reader r(doc, "config");
  r.allow({"seed", "format", "out", "mode", "threads", "params", "solver", "beliefs", "figure1", "sweep", "costs",
           "calibrate", "experiment"});
  if (r.has("seed")) {
    std::uint64_t seed = 0;
    r.integer("seed", seed);
    cfg.seed = seed;
  }
  std::string s;
  r.string("format", s);
  if (!s.empty()) cfg.format = parse_format(s);
  s.clear();
  r.string("out", s);
  if (!s.empty()) cfg.out = s;
  s.clear();
  r.string("mode", s);
  if (!s.empty()) cfg.mode = parse_belief_mode(s);
  r.integer("threads", cfg.threads);
  if (r.has("params")) detail::read_params(detail::Reader(r.at("params"), "config.params"), cfg.params);
  if (r.has("solver")) detail::read_solver(detail::Reader(r.at("solver"), "config.solver"), cfg.solver);
  if (r.has("beliefs")) detail::read_beliefs(detail::Reader(r.at("beliefs"), "config.beliefs"), cfg.beliefs);
  if (r.has("figure1")) detail::read_figure1(detail::Reader(r.at("figure1"), "config.figure1"), cfg.figure1);
  if (r.has("sweep")) detail::read_sweep(detail::Reader(r.at("sweep"), "config.sweep"), cfg.sweep);
  if (r.has("costs")) {
    const detail::Reader c(r.at("costs"), "config.costs");
    c.allow({"c"});
    c.grid("c", cfg.costs.c);
  }
  if (r.has("calibrate")) {
    const detail::Reader c(r.at("calibrate"), "config.calibrate");
    c.allow({"targets"});
    c.grid("targets", cfg.calibrate.targets);
  }
  if (r.has("experiment")) {
    detail::read_experiment(detail::Reader(r.at("experiment"), "config.experiment"), cfg.experiment);
  }
  cfg.experiment.link.mode = cfg.mode;
  for (auto* p : {&cfg.experiment.input_countries, &cfg.experiment.input_microdata}) {
    if (*p && p->value().is_relative() && !base_dir.empty()) *p = base_dir / p->value();
  }
  cfg.canonical = doc.dump();
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const IoError&) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(text, path.parent_path());
}

}  // namespace prosocial::cli
