// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "prism/model.hpp"
#include "prism/stats.hpp"

namespace prism {

/// |DFT| of the kernel zero-padded to n_points, bins 0..n_points/2.
std::vector<double> half_magnitude_spectrum(std::span<const double> kernel, std::size_t n_points);

/// Cosine distances between L2-normalized half magnitude spectra.
struct DistanceSet {
  std::vector<double> distances;                           // one per unordered pair, i < j
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // filter indices of each distance
  std::vector<std::size_t> excluded;                       // filters with an all-zero spectrum
  std::vector<std::string> warnings;
};

/// Throws ConfigError with fewer than two filters and ShapeError when a
/// filter is longer than n_points.
DistanceSet pairwise_fft_cosine(const std::vector<std::vector<double>>& filters, std::size_t n_points = 256);

struct DiversityReport {
  std::string filter_set;
  std::size_t n_points = 256;
  std::size_t n_filters = 0;
  std::vector<double> distances;
  double mean = 0.0;
  double median = 0.0;
  std::vector<std::string> warnings;
  /// Present when compared against another filter set.
  std::optional<std::string> compared_with;
  double compared_mean = 0.0;
  double compared_median = 0.0;
  std::optional<MannWhitneyResult> test;
};

double mean_of(std::span<const double> v);
double median_of(std::vector<double> v);

DiversityReport diversity_report(const std::string& filter_set, const std::vector<std::vector<double>>& filters,
                                 std::size_t n_points = 256);
/// Mann-Whitney comparison of this report's distances against `other`'s.
void compare_diversity(DiversityReport& report, const DiversityReport& other);

/// Normalized kernels of every channel and filter, channel-major.
template <typename T>
std::vector<std::vector<double>> learned_filters(const FilterBank<T>& bank);

nlohmann::ordered_json to_json(const DiversityReport& report);

}  // namespace prism
