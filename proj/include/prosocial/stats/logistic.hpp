#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "prosocial/error.hpp"
#include "prosocial/stats/distributions.hpp"

namespace prosocial::stats {

inline const std::string kInterceptName = "(Intercept)";

/// Product term name = left * right, recomputed when a margin moves a factor.
struct Interaction {
  std::string name;
  std::string left;
  std::string right;
};

struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd x;
  std::vector<Interaction> interactions;

  Eigen::Index column(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("unknown design column '" + name + "'");
    return static_cast<Eigen::Index>(it - names.begin());
  }
};

struct LogisticOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;
  /// Relative residual norm below which a column counts as collinear.
  double rank_tolerance = 1e-9;
  /// A linear predictor beyond this magnitude means fitted probabilities
  /// have saturated, i.e. the data are (quasi-)separated.
  double separation_eta = 30.0;
};

struct RegressionFit {
  std::vector<std::string> names;
  Eigen::VectorXd estimates;
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd covariance;
  double log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  std::size_t n = 0;
  std::vector<std::string> dropped;
  std::vector<Interaction> interactions;
  /// Log-likelihood after each accepted IRLS step, starting at beta = 0.
  std::vector<double> log_likelihood_trace;

  Eigen::Index index(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("no coefficient named '" + name + "'");
    return static_cast<Eigen::Index>(it - names.begin());
  }
  double coef(const std::string& name) const { return estimates[index(name)]; }
  double se(const std::string& name) const { return std_errors[index(name)]; }
  double z(const std::string& name) const { return coef(name) / se(name); }
};

inline double logistic_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  long double ll = 0.0L;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y[i] * eta[i] - softplus(eta[i]);
  return static_cast<double>(ll);
}

/// Gradient of the log-likelihood, X'(y - p).
inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd resid(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[i] - logistic(eta[i]);
  return x.transpose() * resid;
}

namespace detail {

// Greedy left-to-right column selection: a column is kept when its residual
// after projecting on the kept columns is not negligible.
inline std::vector<Eigen::Index> independent_columns(const Eigen::MatrixXd& x, double tol) {
  std::vector<Eigen::Index> kept;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    const double norm = col.norm();
    if (norm == 0.0) continue;
    if (kept.empty()) {
      kept.push_back(j);
      continue;
    }
    Eigen::MatrixXd basis(x.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t k = 0; k < kept.size(); ++k) basis.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);
    const Eigen::VectorXd coef = basis.colPivHouseholderQr().solve(col);
    if ((col - basis * coef).norm() > tol * norm) kept.push_back(j);
  }
  return kept;
}

}  // namespace detail

/// Maximum-likelihood logistic regression by iteratively reweighted least
/// squares with step halving, so the log-likelihood never decreases.
/// Collinear columns are dropped (left to right) and reported.
inline RegressionFit logistic_fit(const DesignMatrix& design, const Eigen::VectorXd& y, const LogisticOptions& opt = {}) {
  const Eigen::MatrixXd& x_full = design.x;
  if (x_full.rows() != y.size()) throw ConfigError("design rows and outcome length differ");
  if (static_cast<std::size_t>(x_full.cols()) != design.names.size()) throw ConfigError("design names and columns differ");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw ConfigError("logistic outcome must be 0/1");
  }
  const double ones = y.sum();
  if (ones == 0.0 || ones == static_cast<double>(y.size())) {
    throw SeparationError("outcome is constant; no maximum-likelihood estimate exists");
  }

  RegressionFit fit;
  fit.n = static_cast<std::size_t>(y.size());
  const auto kept = detail::independent_columns(x_full, opt.rank_tolerance);
  for (Eigen::Index j = 0; j < x_full.cols(); ++j) {
    if (std::find(kept.begin(), kept.end(), j) == kept.end()) fit.dropped.push_back(design.names[static_cast<std::size_t>(j)]);
  }
  Eigen::MatrixXd x(x_full.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    x.col(static_cast<Eigen::Index>(k)) = x_full.col(kept[k]);
    fit.names.push_back(design.names[static_cast<std::size_t>(kept[k])]);
  }
  for (const auto& term : design.interactions) {
    if (std::find(fit.names.begin(), fit.names.end(), term.name) != fit.names.end()) fit.interactions.push_back(term);
  }
  if (x.rows() <= x.cols()) throw ConfigError("logistic fit needs more rows than columns");

  const Eigen::Index p = x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = logistic_log_likelihood(x, y, beta);
  fit.log_likelihood_trace.push_back(ll);

  auto information = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double pi = logistic(eta[i]);
      w[i] = pi * (1.0 - pi);
    }
    return Eigen::MatrixXd(x.transpose() * w.asDiagonal() * x);
  };

  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::VectorXd score = logistic_score(x, y, beta);
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(information(beta));
    if (ldlt.info() != Eigen::Success) throw SeparationError("information matrix is singular");
    Eigen::VectorXd step = ldlt.solve(score);

    double ll_new = logistic_log_likelihood(x, y, beta + step);
    for (int halve = 0; halve < 40 && !(ll_new >= ll - 1e-12 * std::abs(ll)); ++halve) {
      step *= 0.5;
      ll_new = logistic_log_likelihood(x, y, beta + step);
    }
    if (!(ll_new >= ll - 1e-12 * std::abs(ll))) {
      step.setZero();
      ll_new = ll;
    }
    beta += step;
    ll = std::max(ll, ll_new);
    fit.log_likelihood_trace.push_back(ll_new);
    fit.iterations = it + 1;

    if (step.cwiseAbs().maxCoeff() < opt.tolerance) {
      fit.converged = true;
      break;
    }
  }

  if ((x * beta).cwiseAbs().maxCoeff() > opt.separation_eta) {
    throw SeparationError("fitted probabilities saturate (perfect or quasi-perfect separation); "
                          "coefficients diverge");
  }
  fit.estimates = beta;
  fit.log_likelihood = logistic_log_likelihood(x, y, beta);
  fit.covariance = information(beta).inverse();
  fit.std_errors = fit.covariance.diagonal().cwiseSqrt();
  return fit;
}

/// Fitted probabilities along one covariate axis with everything else held
/// at `profile`. The intercept defaults to 1 and other coefficients the
/// profile omits to 0; interaction terms follow their factors.
inline std::vector<double> predictive_margin(const RegressionFit& fit, const std::map<std::string, double>& profile,
                                             const std::string& axis, const std::vector<double>& axis_values) {
  for (const auto& [name, value] : profile) {
    if (std::find(fit.names.begin(), fit.names.end(), name) == fit.names.end()) {
      throw ConfigError("profile names unknown covariate '" + name + "'");
    }
  }
  if (std::find(fit.names.begin(), fit.names.end(), axis) == fit.names.end()) {
    throw ConfigError("margin axis '" + axis + "' is not a coefficient");
  }

  std::vector<double> out;
  out.reserve(axis_values.size());
  for (double a : axis_values) {
    std::map<std::string, double> point = profile;
    if (!point.count(kInterceptName)) point[kInterceptName] = 1.0;
    point[axis] = a;
    for (const auto& term : fit.interactions) {
      const double l = point.count(term.left) ? point.at(term.left) : 0.0;
      const double r = point.count(term.right) ? point.at(term.right) : 0.0;
      point[term.name] = l * r;
    }
    double eta = 0.0;
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
      const auto it = point.find(fit.names[j]);
      if (it != point.end()) eta += fit.estimates[static_cast<Eigen::Index>(j)] * it->second;
    }
    out.push_back(logistic(eta));
  }
  return out;
}

}  // namespace prosocial::stats
