#pragma once

// Pooled logistic model of donation on norm x incentive plus individual
// covariates, the desk-scale stand-in for a random-intercept model.
// Country indicator columns are optional: they are collinear with the
// country-level predictors, so enabling them leaves norm and incentive
// effects identified only through the dropped reference columns.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "prosocial/stats/logistic.hpp"
#include "prosocial/synthsurvey.hpp"

namespace prosocial {

struct DesignOptions {
  IncentiveChannel channel = IncentiveChannel::time;
  bool country_indicators = false;
  /// extrinsic flag x incentive. Off by default: under the deterministic
  /// decision rule, strongly extrinsic agents in incentive countries almost
  /// always act, which separates the data along this column.
  bool extrinsic_interaction = false;
};

inline const std::string kNormColumn = "norm";
inline const std::string kPartialColumn = "incentive_0.5";
inline const std::string kFullColumn = "incentive_1";
inline const std::string kPartialInteraction = "norm_x_incentive_0.5";
/// The norm x incentive contrast the experiment checks.
inline const std::string kInteractionColumn = "norm_x_incentive_1";

inline stats::DesignMatrix build_design(const std::vector<SurveyRow>& rows, const std::vector<CountrySpec>& countries,
                                        const DesignOptions& opt) {
  std::unordered_map<int, const CountrySpec*> by_id;
  for (const auto& c : countries) by_id[c.country_id] = &c;

  std::vector<std::string> names{stats::kInterceptName, kNormColumn, kPartialColumn, kFullColumn,
                                 kPartialInteraction, kInteractionColumn, "intrinsic", "extrinsic", "cost", "age_std", "female", "cohabiting",
                                 "edu_le15", "edu_16_19", "edu_ge20", "employed", "community_mid",
                                 "community_rural", "children"};
  if (opt.extrinsic_interaction) {
    names.push_back("extrinsic_x_incentive_0.5");
    names.push_back("extrinsic_x_incentive_1");
  }
  const std::size_t base_cols = names.size();
  std::vector<int> country_ids;
  if (opt.country_indicators) {
    std::set<int> ids;
    for (const auto& r : rows) ids.insert(r.country_id);
    country_ids.assign(ids.begin(), ids.end());
    for (std::size_t k = 1; k < country_ids.size(); ++k) names.push_back("country_" + std::to_string(country_ids[k]));
  }

  double age_mean = 0.0, age_sq = 0.0;
  for (const auto& r : rows) age_mean += r.age;
  age_mean /= static_cast<double>(rows.size());
  for (const auto& r : rows) age_sq += (r.age - age_mean) * (r.age - age_mean);
  const double age_sd = std::sqrt(age_sq / static_cast<double>(rows.size() > 1 ? rows.size() - 1 : 1));

  stats::DesignMatrix d;
  d.names = names;
  d.x.setZero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  d.interactions = {{kPartialInteraction, kNormColumn, kPartialColumn}, {kInteractionColumn, kNormColumn, kFullColumn}};
  if (opt.extrinsic_interaction) {
    d.interactions.push_back({"extrinsic_x_incentive_0.5", "extrinsic", kPartialColumn});
    d.interactions.push_back({"extrinsic_x_incentive_1", "extrinsic", kFullColumn});
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SurveyRow& r = rows[i];
    const auto it = by_id.find(r.country_id);
    if (it == by_id.end()) throw ConfigError("row refers to unknown country " + std::to_string(r.country_id));
    const double norm = it->second->norm(opt.channel);
    const double incentive = it->second->incentive(opt.channel);
    auto row = d.x.row(static_cast<Eigen::Index>(i));
    const double partial = incentive > 0.0 && incentive < 1.0 ? 1.0 : 0.0;
    const double full = incentive >= 1.0 ? 1.0 : 0.0;
    const double values[] = {1.0,
                             norm,
                             partial,
                             full,
                             norm * partial,
                             norm * full,
                             static_cast<double>(r.intrinsic_flag),
                             static_cast<double>(r.extrinsic_flag),
                             r.cost,
                             age_sd > 0.0 ? (r.age - age_mean) / age_sd : 0.0,
                             static_cast<double>(r.female),
                             static_cast<double>(r.cohabiting),
                             r.education == 1 ? 1.0 : 0.0,
                             r.education == 2 ? 1.0 : 0.0,
                             r.education == 3 ? 1.0 : 0.0,
                             static_cast<double>(r.employed),
                             r.community == 1 ? 1.0 : 0.0,
                             r.community == 2 ? 1.0 : 0.0,
                             static_cast<double>(r.children),
                             r.extrinsic_flag * partial,
                             r.extrinsic_flag * full};
    const std::size_t fixed = opt.extrinsic_interaction ? 21 : 19;
    for (std::size_t j = 0; j < fixed; ++j) row[static_cast<Eigen::Index>(j)] = values[j];
    for (std::size_t k = 1; k < country_ids.size(); ++k) {
      if (r.country_id == country_ids[k]) row[static_cast<Eigen::Index>(base_cols + k - 1)] = 1.0;
    }
  }
  return d;
}

inline Eigen::VectorXd donation_outcome(const std::vector<SurveyRow>& rows) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) y[static_cast<Eigen::Index>(i)] = rows[i].donated;
  return y;
}

/// Covariate means for every fitted column other than the intercept, the
/// norm/incentive terms and country indicators (which stay at the reference).
inline std::map<std::string, double> mean_profile(const stats::DesignMatrix& d, const stats::RegressionFit& fit) {
  std::map<std::string, double> profile;
  for (const auto& name : fit.names) {
    if (name == stats::kInterceptName || name == kNormColumn || name == kPartialColumn || name == kFullColumn) continue;
    if (name.rfind("country_", 0) == 0) continue;
    bool is_product = false;
    for (const auto& term : fit.interactions) is_product = is_product || term.name == name;
    if (is_product) continue;
    profile[name] = d.x.col(d.column(name)).mean();
  }
  return profile;
}

}  // namespace prosocial
