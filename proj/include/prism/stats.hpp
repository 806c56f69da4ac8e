// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include <json.hpp>

namespace prism {

struct MannWhitneyResult {
  /// U of sample a: pairs (a_i, b_j) with a_i > b_j, ties counting 1/2.
  double u = 0.0;
  /// (U - n_a n_b / 2) / sigma with tie-corrected sigma, no continuity correction.
  double z = 0.0;
  double p_two_sided = 1.0;
  double p_less = 1.0;     // P(U' <= U)
  double p_greater = 1.0;  // P(U' >= U)
  bool exact = false;
};

/// Midranks (1-based) of the pooled values, ties sharing their average rank.
std::vector<double> midranks(std::span<const double> values);

/// Mann-Whitney U test.
///
/// When n_a * n_b <= exact_limit the p-values come from the exact permutation
/// distribution of the observed midranks (ties included); otherwise from the
/// normal approximation with tie-corrected variance and a 0.5 continuity
/// correction. The two-sided p is min(1, 2 min(p_less, p_greater)). If every
/// value is identical all p-values are 1. Throws ConfigError on an empty sample.
MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b, std::size_t exact_limit = 100);

/// Upper tail of the standard normal.
double normal_sf(double z);

nlohmann::ordered_json to_json(const MannWhitneyResult& r);

}  // namespace prism
