#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "prosocial/error.hpp"
#include "prosocial/stats/distributions.hpp"

namespace prosocial::stats {

struct TestResult {
  double statistic = 0.0;
  std::optional<double> df;
  double p_value = 1.0;
};

/// r x k table of non-negative counts, r, k >= 2.
class ContingencyTable {
 public:
  explicit ContingencyTable(std::vector<std::vector<std::int64_t>> counts) : counts_(std::move(counts)) {
    if (counts_.size() < 2) throw ConfigError("contingency table needs at least 2 rows");
    const std::size_t k = counts_.front().size();
    if (k < 2) throw ConfigError("contingency table needs at least 2 columns");
    for (const auto& row : counts_) {
      if (row.size() != k) throw ConfigError("contingency table rows differ in length");
      for (auto v : row) {
        if (v < 0) throw ConfigError("contingency table counts must be non-negative");
      }
    }
  }

  std::size_t rows() const noexcept { return counts_.size(); }
  std::size_t cols() const noexcept { return counts_.front().size(); }
  std::int64_t operator()(std::size_t i, std::size_t j) const { return counts_[i][j]; }

 private:
  std::vector<std::vector<std::int64_t>> counts_;
};

/// Pearson chi-square test of independence.
inline TestResult chi_square_independence(const ContingencyTable& table) {
  const std::size_t r = table.rows(), k = table.cols();
  std::vector<double> row_sum(r, 0.0), col_sum(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double o = static_cast<double>(table(i, j));
      row_sum[i] += o;
      col_sum[j] += o;
      total += o;
    }
  }
  for (double s : row_sum) {
    if (s <= 0.0) throw DegenerateDataError("contingency table has an empty row");
  }
  for (double s : col_sum) {
    if (s <= 0.0) throw DegenerateDataError("contingency table has an empty column");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double e = row_sum[i] * col_sum[j] / total;
      const double d = static_cast<double>(table(i, j)) - e;
      stat += d * d / e;
    }
  }
  const double df = static_cast<double>((r - 1) * (k - 1));
  return {stat, df, chi_square_sf(stat, df)};
}

enum class PValueMethod { automatic, normal, exact };

namespace detail {

struct RankedSamples {
  std::vector<double> ranks;  // midranks, x first then y
  std::size_t n1 = 0;
  double tie_term = 0.0;      // sum over tie groups of t^3 - t
};

inline RankedSamples midranks(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size() + y.size();
  std::vector<double> pooled(x.begin(), x.end());
  pooled.insert(pooled.end(), y.begin(), y.end());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pooled[a] < pooled[b]; });

  RankedSamples out;
  out.n1 = x.size();
  out.ranks.resize(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) out.ranks[order[m]] = mid;
    const double t = static_cast<double>(j - i + 1);
    out.tie_term += t * t * t - t;
    i = j + 1;
  }
  return out;
}

inline double u_from_ranks(const RankedSamples& rs) {
  const double r1 = std::accumulate(rs.ranks.begin(), rs.ranks.begin() + static_cast<std::ptrdiff_t>(rs.n1), 0.0);
  const double n1 = static_cast<double>(rs.n1);
  return r1 - n1 * (n1 + 1.0) / 2.0;
}

inline double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

}  // namespace detail

/// Two-sided p-value from the normal approximation with tie and continuity
/// corrections.
inline double mann_whitney_p_normal(double u, std::size_t n1, std::size_t n2, double tie_term) {
  const double a = static_cast<double>(n1), b = static_cast<double>(n2), n = a + b;
  const double mean = a * b / 2.0;
  double var = a * b / 12.0 * (n + 1.0);
  if (n > 1.0) var -= a * b / 12.0 * tie_term / (n * (n - 1.0));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mean) - 0.5) / std::sqrt(var);
  return std::min(1.0, 2.0 * normal_sf(z));
}

/// Two-sided permutation p-value: share of all C(n1+n2, n1) splits of the
/// pooled midranks whose U is at least as far from n1*n2/2.
inline double mann_whitney_p_exact(std::span<const double> x, std::span<const double> y) {
  const auto rs = detail::midranks(x, y);
  const std::size_t n = rs.ranks.size(), n1 = rs.n1;
  if (detail::binomial(n, n1) > 5e6) throw ConfigError("exact Mann-Whitney p: samples too large to enumerate");
  const double mean = static_cast<double>(n1) * static_cast<double>(n - n1) / 2.0;
  const double observed = std::abs(detail::u_from_ranks(rs) - mean) - 1e-9;
  const double offset = static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;

  std::uint64_t extreme = 0, total = 0;
  std::vector<std::size_t> pick(n1);
  std::iota(pick.begin(), pick.end(), 0);
  while (true) {
    double r = 0.0;
    for (auto i : pick) r += rs.ranks[i];
    ++total;
    if (std::abs(r - offset - mean) >= observed) ++extreme;
    // next combination in lexicographic order
    std::size_t i = n1;
    while (i > 0 && pick[i - 1] == n - n1 + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < n1; ++j) pick[j] = pick[j - 1] + 1;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Mann-Whitney U for x (number of (x, y) pairs with x > y, ties counted
/// half). `automatic` enumerates exactly when at most 10^5 splits exist and
/// uses the normal approximation otherwise.
inline TestResult mann_whitney_u(std::span<const double> x, std::span<const double> y,
                                 PValueMethod method = PValueMethod::automatic) {
  if (x.empty() || y.empty()) throw ConfigError("Mann-Whitney U needs two non-empty samples");
  const auto rs = detail::midranks(x, y);
  const double u = detail::u_from_ranks(rs);
  if (method == PValueMethod::automatic) {
    method = detail::binomial(x.size() + y.size(), x.size()) <= 1e5 ? PValueMethod::exact : PValueMethod::normal;
  }
  const double p = method == PValueMethod::exact ? mann_whitney_p_exact(x, y)
                                                 : mann_whitney_p_normal(u, x.size(), y.size(), rs.tie_term);
  return {u, std::nullopt, p};
}

}  // namespace prosocial::stats
