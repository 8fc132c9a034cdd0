#pragma once

// Synthetic multi-country survey microdata. Each country has an
// acceptability norm in [0, 1] per incentive type and an incentive coding
// in {0, 0.5, 1}. Individuals decide through the model against their
// country's equilibrium beliefs; the demographic covariates are independent
// noise carriers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <future>
#include <numeric>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "prosocial/core_model.hpp"
#include "prosocial/equilibrium.hpp"
#include "prosocial/error.hpp"
#include "prosocial/io/table.hpp"
#include "prosocial/random.hpp"

namespace prosocial {

enum class IncentiveChannel { financial, time };

inline IncentiveChannel parse_channel(std::string_view s) {
  if (s == "financial") return IncentiveChannel::financial;
  if (s == "time") return IncentiveChannel::time;
  throw ConfigError("channel must be 'financial' or 'time', got '" + std::string(s) + "'");
}

inline std::string_view to_string(IncentiveChannel c) noexcept {
  return c == IncentiveChannel::financial ? "financial" : "time";
}

struct CountrySpec {
  int country_id = 0;
  double norm_fin = 0.0;
  double norm_time = 0.0;
  double incentive_fin = 0.0;
  double incentive_time = 0.0;
  double cost_mean = 0.5;

  double norm(IncentiveChannel ch) const noexcept { return ch == IncentiveChannel::financial ? norm_fin : norm_time; }
  double incentive(IncentiveChannel ch) const noexcept {
    return ch == IncentiveChannel::financial ? incentive_fin : incentive_time;
  }
};

/// Shares of countries at incentive coding 1 and 0.5; the rest get 0.
struct RegimeShares {
  double full = 0.0;
  double partial = 0.0;
};

struct CountrySettings {
  double norm_fin_lo = 0.02, norm_fin_hi = 0.39;
  double norm_time_lo = 0.12, norm_time_hi = 0.70;
  RegimeShares fin{0.14, 0.04};
  RegimeShares time{0.29, 0.25};
  double cost_mean_lo = 0.45, cost_mean_hi = 0.55;
};

/// How country variables and latent draws map onto model parameters and
/// reported survey items.
struct LinkSettings {
  IncentiveChannel channel = IncentiveChannel::time;
  double vis = 1.0;
  double pref_va = 1.0;
  double pref_vv = 1.0;
  double s_va = 0.0;
  /// VIS multiplier for countries where only some operators offer the incentive.
  double partial_vis_factor = 0.5;
  /// Individual costs are U[cost_mean - spread, cost_mean + spread], clamped to [0, 1].
  double cost_spread = 0.1;
  /// intrinsic_flag = v_a > cutoff; 0.37 gives a 0.63 share.
  double intrinsic_cutoff = 0.37;
  /// extrinsic_flag = v_v > cutoff; 0.94 gives a 0.06 share.
  double extrinsic_cutoff = 0.94;
  BeliefMode mode = BeliefMode::rational;
};

/// Acceptability share in [0, 1] to model norm in [-1, 1]; 0.5 is neutral.
inline double norm_to_s_vv(double norm) noexcept { return 2.0 * norm - 1.0; }
inline double s_vv_to_norm(double s_vv) noexcept { return 0.5 * (s_vv + 1.0); }

inline ModelParams country_params(const CountrySpec& country, const LinkSettings& link) {
  const double coding = country.incentive(link.channel);
  ModelParamValues v;
  v.c = country.cost_mean;
  v.R = coding > 0.0 ? 1 : 0;
  v.vis = link.vis * (coding > 0.0 && coding < 1.0 ? link.partial_vis_factor : 1.0);
  v.pref_va = link.pref_va;
  v.pref_vv = link.pref_vv;
  v.s_va = link.s_va;
  v.s_vv = norm_to_s_vv(country.norm(link.channel));
  return ModelParams(v);
}

namespace detail {

inline void check_range(double lo, double hi, std::string_view name) {
  if (!(lo >= 0.0 && hi <= 1.0 && lo < hi)) {
    throw ConfigError(std::string(name) + " range must satisfy 0 <= lo < hi <= 1");
  }
}

inline void check_shares(const RegimeShares& s, std::string_view name) {
  if (!(s.full >= 0.0 && s.partial >= 0.0 && s.full + s.partial <= 1.0 + 1e-12)) {
    throw ConfigError(std::string(name) + " regime shares must be non-negative and sum to at most 1");
  }
}

// Largest-remainder apportionment of n countries to codings {0, 0.5, 1},
// then a seeded shuffle.
inline std::vector<double> assign_regimes(std::size_t n, const RegimeShares& s, Rng& rng) {
  const std::array<double, 3> share{std::max(0.0, 1.0 - s.full - s.partial), s.partial, s.full};
  const std::array<double, 3> coding{0.0, 0.5, 1.0};
  std::array<std::size_t, 3> count{};
  std::array<double, 3> remainder{};
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double exact = share[k] * static_cast<double>(n);
    count[k] = static_cast<std::size_t>(std::floor(exact));
    remainder[k] = exact - static_cast<double>(count[k]);
    assigned += count[k];
  }
  while (assigned < n) {
    const auto k = static_cast<std::size_t>(std::max_element(remainder.begin(), remainder.end()) - remainder.begin());
    ++count[k];
    remainder[k] = -1.0;
    ++assigned;
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t k = 0; k < 3; ++k) out.insert(out.end(), count[k], coding[k]);
  for (std::size_t i = n; i > 1; --i) std::swap(out[i - 1], out[rng.below(i)]);
  return out;
}

}  // namespace detail

inline std::vector<CountrySpec> generate_countries(std::size_t n, const CountrySettings& s, std::uint64_t seed) {
  if (n < 2) throw ConfigError("need at least 2 countries");
  detail::check_range(s.norm_fin_lo, s.norm_fin_hi, "financial norm");
  detail::check_range(s.norm_time_lo, s.norm_time_hi, "time norm");
  detail::check_range(s.cost_mean_lo, s.cost_mean_hi, "cost mean");
  detail::check_shares(s.fin, "financial");
  detail::check_shares(s.time, "time");

  Rng rng(seed);
  std::vector<CountrySpec> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].country_id = static_cast<int>(i + 1);
    out[i].norm_fin = rng.uniform(s.norm_fin_lo, s.norm_fin_hi);
    out[i].norm_time = rng.uniform(s.norm_time_lo, s.norm_time_hi);
    out[i].cost_mean = rng.uniform(s.cost_mean_lo, s.cost_mean_hi);
  }
  const auto fin = detail::assign_regimes(n, s.fin, rng);
  const auto time = detail::assign_regimes(n, s.time, rng);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].incentive_fin = fin[i];
    out[i].incentive_time = time[i];
  }
  return out;
}

struct SurveyRow {
  int country_id = 0;
  int donated = 0;
  double v_a = 0.0;
  double v_v = 0.0;
  double cost = 0.0;
  int intrinsic_flag = 0;
  int extrinsic_flag = 0;
  int age = 18;
  int female = 0;
  int cohabiting = 0;
  int education = 0;  // 0 none, 1 <= 15 years, 2 16-19, 3 >= 20
  int employed = 0;
  int community = 0;  // 0 large town, 1 mid-sized town, 2 rural
  int children = 0;

  friend bool operator==(const SurveyRow&, const SurveyRow&) = default;
};

namespace detail {

inline constexpr std::array<double, 4> kEducationShares{0.01, 0.17, 0.45, 0.37};
inline constexpr std::array<double, 3> kCommunityShares{0.27, 0.42, 0.31};
inline constexpr std::array<double, 4> kChildrenShares{0.80, 0.13, 0.05, 0.02};

inline std::vector<SurveyRow> generate_country_rows(const CountrySpec& country, std::size_t n,
                                                    const LinkSettings& link, std::uint64_t seed) {
  const ModelParams params = country_params(country, link);
  const EquilibriumResult eq = solve_threshold(params, link.mode);
  if (!eq.converged) {
    throw ConvergenceError("equilibrium did not converge for country " + std::to_string(country.country_id));
  }
  Rng rng(seed);
  std::vector<SurveyRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    SurveyRow& r = rows[i];
    r.country_id = country.country_id;
    r.v_a = rng.uniform();
    r.v_v = rng.uniform();
    r.cost = std::clamp(country.cost_mean + link.cost_spread * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
    r.donated = decide(Agent(r.v_a, r.v_v, r.cost), params, eq.beliefs).acts() ? 1 : 0;
    r.intrinsic_flag = r.v_a > link.intrinsic_cutoff ? 1 : 0;
    r.extrinsic_flag = r.v_v > link.extrinsic_cutoff ? 1 : 0;
    r.age = 18 + static_cast<int>(rng.below(68));
    r.female = rng.bernoulli(0.56) ? 1 : 0;
    r.cohabiting = rng.bernoulli(0.65) ? 1 : 0;
    r.education = static_cast<int>(rng.categorical(kEducationShares));
    r.employed = rng.bernoulli(0.49) ? 1 : 0;
    r.community = static_cast<int>(rng.categorical(kCommunityShares));
    r.children = static_cast<int>(rng.categorical(kChildrenShares));
  }
  return rows;
}

}  // namespace detail

/// Rows ordered by country (input order), then row index. Country k draws
/// from derive_seed(seed, k).
inline std::vector<SurveyRow> generate_microdata(const std::vector<CountrySpec>& countries, std::size_t n_per_country,
                                                 const LinkSettings& link, std::uint64_t seed, unsigned threads = 0) {
  if (n_per_country == 0) throw ConfigError("n_per_country must be >= 1");
  if (countries.empty()) throw ConfigError("no countries given");
  detail::require_in(link.cost_spread, 0.0, 1.0, "cost_spread");
  detail::require_in(link.partial_vis_factor, 0.0, 1.0, "partial_vis_factor");
  detail::require_in(link.intrinsic_cutoff, 0.0, 1.0, "intrinsic_cutoff");
  detail::require_in(link.extrinsic_cutoff, 0.0, 1.0, "extrinsic_cutoff");
  for (const auto& c : countries) country_params(c, link);

  std::vector<std::vector<SurveyRow>> blocks(countries.size());
  unsigned workers = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, countries.size()));
  auto run = [&](std::size_t k) {
    blocks[k] = detail::generate_country_rows(countries[k], n_per_country, link, derive_seed(seed, k));
  };
  if (workers <= 1) {
    for (std::size_t k = 0; k < countries.size(); ++k) run(k);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t k = w; k < countries.size(); k += workers) run(k);
      }));
    }
    for (auto& j : jobs) j.get();
  }
  std::vector<SurveyRow> out;
  out.reserve(countries.size() * n_per_country);
  for (auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

/// Expected donation rate of a country: the participation mass at each
/// individual cost, averaged over the cost distribution (midpoint rule).
inline double analytic_country_rate(const CountrySpec& country, const LinkSettings& link, int nodes = 4000) {
  const ModelParams params = country_params(country, link);
  const EquilibriumResult eq = solve_threshold(params, link.mode);
  const double shift = params.c() - eq.t_star;
  if (link.cost_spread == 0.0) return eq.participation_rate;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double u = (i + 0.5) / nodes;
    const double c = std::clamp(country.cost_mean + link.cost_spread * (2.0 * u - 1.0), 0.0, 1.0);
    sum += participation_mass({params.incentive(), c - shift});
  }
  return sum / nodes;
}

inline const std::vector<std::string>& microdata_columns() {
  static const std::vector<std::string> cols{"country_id", "row", "donated", "v_a", "v_v", "cost",
                                             "intrinsic_flag", "extrinsic_flag", "age", "female", "cohabiting",
                                             "education", "employed", "community", "children"};
  return cols;
}

inline io::Table microdata_table(const std::vector<SurveyRow>& rows) {
  io::Table t;
  t.schema = "microdata/v1";
  t.columns = microdata_columns();
  std::int64_t prev_country = -1, idx = 0;
  for (const auto& r : rows) {
    idx = r.country_id == prev_country ? idx + 1 : 0;
    prev_country = r.country_id;
    t.add_row({std::int64_t{r.country_id}, idx, std::int64_t{r.donated}, r.v_a, r.v_v, r.cost,
               std::int64_t{r.intrinsic_flag}, std::int64_t{r.extrinsic_flag}, std::int64_t{r.age},
               std::int64_t{r.female}, std::int64_t{r.cohabiting}, std::int64_t{r.education},
               std::int64_t{r.employed}, std::int64_t{r.community}, std::int64_t{r.children}});
  }
  return t;
}

inline std::vector<SurveyRow> microdata_from_csv(const io::CsvDocument& doc) {
  const auto& cols = microdata_columns();
  std::vector<std::size_t> at;
  for (const auto& c : cols) at.push_back(doc.column(c));
  std::vector<SurveyRow> rows;
  rows.reserve(doc.rows.size());
  for (const auto& f : doc.rows) {
    auto i = [&](std::size_t k) { return static_cast<int>(io::parse_int(f[at[k]])); };
    auto d = [&](std::size_t k) { return io::parse_double(f[at[k]]); };
    SurveyRow r;
    r.country_id = i(0);
    r.donated = i(2);
    r.v_a = d(3);
    r.v_v = d(4);
    r.cost = d(5);
    r.intrinsic_flag = i(6);
    r.extrinsic_flag = i(7);
    r.age = i(8);
    r.female = i(9);
    r.cohabiting = i(10);
    r.education = i(11);
    r.employed = i(12);
    r.community = i(13);
    r.children = i(14);
    const bool ok = (r.donated == 0 || r.donated == 1) && r.v_a >= 0.0 && r.v_a <= 1.0 && r.v_v >= 0.0 &&
                    r.v_v <= 1.0 && r.cost >= 0.0 && r.cost <= 1.0 && (r.intrinsic_flag | 1) == 1 &&
                    (r.extrinsic_flag | 1) == 1 && (r.female | 1) == 1 && (r.cohabiting | 1) == 1 &&
                    (r.employed | 1) == 1 && r.education >= 0 && r.education <= 3 && r.community >= 0 &&
                    r.community <= 2 && r.children >= 0;
    if (!ok) throw IoError("microdata row " + std::to_string(rows.size() + 1) + " has out-of-range values");
    rows.push_back(r);
  }
  return rows;
}

inline io::Table countries_table(const std::vector<CountrySpec>& countries) {
  io::Table t;
  t.schema = "countries/v1";
  t.columns = {"country_id", "norm_fin", "norm_time", "incentive_fin", "incentive_time", "cost_mean"};
  for (const auto& c : countries) {
    t.add_row({std::int64_t{c.country_id}, c.norm_fin, c.norm_time, c.incentive_fin, c.incentive_time, c.cost_mean});
  }
  return t;
}

inline std::vector<CountrySpec> countries_from_csv(const io::CsvDocument& doc) {
  const std::size_t id = doc.column("country_id"), nf = doc.column("norm_fin"), nt = doc.column("norm_time"),
                    inf = doc.column("incentive_fin"), it = doc.column("incentive_time"), cm = doc.column("cost_mean");
  std::vector<CountrySpec> out;
  auto coding = [](double x) { return x == 0.0 || x == 0.5 || x == 1.0; };
  auto unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  for (const auto& f : doc.rows) {
    out.push_back({static_cast<int>(io::parse_int(f[id])), io::parse_double(f[nf]), io::parse_double(f[nt]),
                   io::parse_double(f[inf]), io::parse_double(f[it]), io::parse_double(f[cm])});
    const CountrySpec& c = out.back();
    if (!unit(c.norm_fin) || !unit(c.norm_time) || !unit(c.cost_mean) || !coding(c.incentive_fin) ||
        !coding(c.incentive_time)) {
      throw IoError("country " + std::to_string(c.country_id) + " has out-of-range values");
    }
  }
  return out;
}

}  // namespace prosocial
