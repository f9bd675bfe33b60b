// SPDX-License-Identifier: Apache-2.0
/**
 * @file   metrics.hpp
 * @brief  Kendall tau-b, RMSE and the multi-system mean-rank score.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gedf/error.hpp"

namespace gedf::eval {

inline constexpr std::size_t kNumLocations = 6;
inline constexpr std::size_t kNumCategories = 4;
inline constexpr std::size_t kNumMetrics = 2;
inline constexpr const char *kLocationNames[kNumLocations] = {"loc1", "loc2", "loc3",
                                                              "loc4", "loc5", "loc6"};
inline constexpr const char *kCategoryNames[kNumCategories] = {"car_left", "car_right",
                                                               "cv_left", "cv_right"};

enum class Metric { kendall = 0, rmse = 1 };

inline const char *metric_name(Metric m) { return m == Metric::kendall ? "kendall" : "rmse"; }

/// Pair counts behind tau-b. x_only/y_only are pairs tied in one variable
/// only; joint pairs are tied in both and do not enter the statistic.
struct PairCounts {
  std::int64_t concordant = 0, discordant = 0, x_only = 0, y_only = 0, joint = 0;
};

/// tau-b from pair counts; nullopt when either variable is entirely tied.
inline std::optional<double> tau_b_from_counts(const PairCounts &p) {
  const std::int64_t a = p.concordant + p.discordant + p.x_only;
  const std::int64_t b = p.concordant + p.discordant + p.y_only;
  if (a == 0 || b == 0) return std::nullopt;
  return static_cast<double>(p.concordant - p.discordant) /
         std::sqrt(static_cast<double>(a) * static_cast<double>(b));
}

namespace detail {

inline std::int64_t tied_pairs_in_runs(const std::vector<double> &sorted) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

/// Stable merge sort of v counting inversions (strictly greater before smaller).
inline std::int64_t sort_count_swaps(std::vector<double> &v, std::vector<double> &buf,
                                     std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = sort_count_swaps(v, buf, lo, mid) + sort_count_swaps(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<long>(lo), buf.begin() + static_cast<long>(hi),
            v.begin() + static_cast<long>(lo));
  return swaps;
}

inline void require_series(std::span<const double> x, std::span<const double> y,
                           std::size_t min_n, const char *what) {
  if (x.size() != y.size())
    throw ShapeError(std::string(what) + ": series lengths differ (" + std::to_string(x.size()) +
                     " vs " + std::to_string(y.size()) + ")");
  if (x.size() < min_n)
    throw InsufficientDataError(std::string(what) + " needs at least " + std::to_string(min_n) +
                                " samples, got " + std::to_string(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw ContractError(std::string(what) + ": non-finite value at index " + std::to_string(i));
}

}  // namespace detail

/// O(n log n) pair counting (sort by x then y, count y inversions).
inline PairCounts kendall_pair_counts(std::span<const double> x, std::span<const double> y) {
  detail::require_series(x, y, 0, "kendall_tau");
  const std::size_t n = x.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
  });
  const auto n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - (n > 0)) / 2;

  std::int64_t x_ties = 0, joint = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i + 1;
    while (j < n && x[idx[j]] == x[idx[i]]) ++j;
    const auto run = static_cast<std::int64_t>(j - i);
    x_ties += run * (run - 1) / 2;
    for (std::size_t a = i; a < j;) {
      std::size_t b = a + 1;
      while (b < j && y[idx[b]] == y[idx[a]]) ++b;
      const auto jr = static_cast<std::int64_t>(b - a);
      joint += jr * (jr - 1) / 2;
      a = b;
    }
    i = j;
  }

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[idx[i]];
  const std::int64_t swaps = detail::sort_count_swaps(ys, buf, 0, n);
  const std::int64_t y_ties = detail::tied_pairs_in_runs(ys);

  PairCounts p;
  p.joint = joint;
  p.x_only = x_ties - joint;
  p.y_only = y_ties - joint;
  p.discordant = swaps;
  p.concordant = n0 - x_ties - y_ties + joint - swaps;
  return p;
}

/// Kendall tau-b of (prediction, truth). nullopt when a variable is all-tied.
inline std::optional<double> kendall_tau(std::span<const double> pred,
                                         std::span<const double> truth) {
  detail::require_series(pred, truth, 2, "kendall_tau");
  return tau_b_from_counts(kendall_pair_counts(pred, truth));
}

inline double rmse(std::span<const double> pred, std::span<const double> truth) {
  detail::require_series(pred, truth, 1, "rmse");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

/// 6 x 4 x 2 grid of optional metric values (absent cells are skipped).
struct MetricGrid {
  std::array<std::array<std::array<std::optional<double>, kNumMetrics>, kNumCategories>,
             kNumLocations>
      cells{};

  std::optional<double> &at(std::size_t loc, std::size_t cat, Metric m) {
    return cells[loc][cat][static_cast<std::size_t>(m)];
  }
  const std::optional<double> &at(std::size_t loc, std::size_t cat, Metric m) const {
    return cells[loc][cat][static_cast<std::size_t>(m)];
  }
};

enum class TiePolicy { average, min, max };

inline const char *tie_policy_name(TiePolicy p) {
  switch (p) {
    case TiePolicy::average: return "average";
    case TiePolicy::min: return "min";
    case TiePolicy::max: return "max";
  }
  return "?";
}

using RankingInput = std::vector<std::pair<std::string, MetricGrid>>;
using RankingScores = std::vector<std::pair<std::string, double>>;

/// Ranks systems in every populated cell (Kendall: higher is better; RMSE:
/// lower is better) and averages each system's rank over the cells.
inline RankingScores ranking_score(const RankingInput &systems,
                                   TiePolicy policy = TiePolicy::average) {
  if (systems.empty()) throw InsufficientDataError("ranking needs at least one system");
  const std::size_t S = systems.size();
  std::vector<double> sum(S, 0.0);
  std::size_t cells = 0;
  for (std::size_t l = 0; l < kNumLocations; ++l)
    for (std::size_t c = 0; c < kNumCategories; ++c)
      for (Metric m : {Metric::kendall, Metric::rmse}) {
        std::size_t present = 0;
        for (const auto &[name, grid] : systems) present += grid.at(l, c, m).has_value();
        if (present == 0) continue;
        if (present != S) {
          for (const auto &[name, grid] : systems)
            if (!grid.at(l, c, m))
              throw ProtocolError("system '" + name + "' lacks cell " + kLocationNames[l] + "/" +
                                  kCategoryNames[c] + "/" + metric_name(m));
        }
        ++cells;
        const double sign = m == Metric::kendall ? -1.0 : 1.0;  // smaller key ranks first
        std::vector<double> key(S);
        for (std::size_t s = 0; s < S; ++s) key[s] = sign * *systems[s].second.at(l, c, m);
        for (std::size_t s = 0; s < S; ++s) {
          std::size_t better = 0, equal = 0;
          for (std::size_t o = 0; o < S; ++o) {
            if (key[o] < key[s]) ++better;
            else if (key[o] == key[s]) ++equal;
          }
          const double lo = static_cast<double>(better + 1);
          const double hi = static_cast<double>(better + equal);
          sum[s] += policy == TiePolicy::min ? lo : policy == TiePolicy::max ? hi : 0.5 * (lo + hi);
        }
      }
  if (cells == 0) throw InsufficientDataError("no populated cells to rank");
  RankingScores out;
  for (std::size_t s = 0; s < S; ++s)
    out.emplace_back(systems[s].first, sum[s] / static_cast<double>(cells));
  return out;
}

inline std::optional<std::size_t> location_index(const std::string &name) {
  for (std::size_t i = 0; i < kNumLocations; ++i)
    if (name == kLocationNames[i]) return i;
  return std::nullopt;
}

}  // namespace gedf::eval
