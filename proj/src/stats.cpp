// SPDX-License-Identifier: Apache-2.0
#include "prism/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prism/errors.hpp"

namespace prism {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

std::vector<double> midranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return values[i] < values[j]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double rank = static_cast<double>(i + j + 1) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

namespace {

// Exact null distribution of the doubled rank sum of a size-n_a subset.
// Returns {P(S <= s_obs), P(S >= s_obs)}.
std::pair<double, double> exact_tails(const std::vector<long>& doubled_ranks, std::size_t n_a, long s_obs) {
  const long max_sum = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0L);
  // counts[j][s]: number of j-subsets with doubled rank sum s (exact in double below 2^53).
  std::vector<std::vector<double>> counts(n_a + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
  counts[0][0] = 1.0;
  for (const long r : doubled_ranks) {
    for (std::size_t j = n_a; j >= 1; --j) {
      auto& dst = counts[j];
      const auto& src = counts[j - 1];
      for (long s = max_sum; s >= r; --s) dst[static_cast<std::size_t>(s)] += src[static_cast<std::size_t>(s - r)];
    }
  }
  double total = 0.0, below = 0.0, above = 0.0;
  for (long s = 0; s <= max_sum; ++s) {
    const double c = counts[n_a][static_cast<std::size_t>(s)];
    total += c;
    if (s <= s_obs) below += c;
    if (s >= s_obs) above += c;
  }
  return {below / total, above / total};
}

}  // namespace

MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b, std::size_t exact_limit) {
  if (a.empty() || b.empty()) throw ConfigError("mann_whitney_u: both samples must be non-empty");
  const std::size_t n_a = a.size(), n_b = b.size(), n = n_a + n_b;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = midranks(pooled);

  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < n_a; ++i) rank_sum_a += ranks[i];
  const double na = static_cast<double>(n_a), nb = static_cast<double>(n_b), nn = static_cast<double>(n);

  MannWhitneyResult r;
  r.u = rank_sum_a - na * (na + 1.0) / 2.0;

  // Tie correction: sum over tie groups of t^3 - t.
  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
  if (!(var > 0.0)) {
    // Every value identical (or a single observation per side with a tie).
    r.z = 0.0;
    return r;
  }
  const double sigma = std::sqrt(var);
  r.z = (r.u - mu) / sigma;

  if (n_a * n_b <= exact_limit) {
    std::vector<long> doubled;
    doubled.reserve(n);
    for (auto rk : ranks) doubled.push_back(std::lround(2.0 * rk));
    const long s_obs = std::lround(2.0 * rank_sum_a);
    const auto [below, above] = exact_tails(doubled, n_a, s_obs);
    r.p_less = below;
    r.p_greater = above;
    r.exact = true;
  } else {
    r.p_less = std::min(1.0, normal_sf((mu - r.u - 0.5) / sigma));
    r.p_greater = std::min(1.0, normal_sf((r.u - mu - 0.5) / sigma));
  }
  r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_less, r.p_greater));
  return r;
}

nlohmann::ordered_json to_json(const MannWhitneyResult& r) {
  nlohmann::ordered_json j;
  j["U"] = r.u;
  j["z"] = r.z;
  j["p_two_sided"] = r.p_two_sided;
  j["p_less"] = r.p_less;
  j["p_greater"] = r.p_greater;
  j["exact"] = r.exact;
  return j;
}

}  // namespace prism
