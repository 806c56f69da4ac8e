// SPDX-License-Identifier: Apache-2.0
#include "prism/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prism/fft.hpp"

namespace prism {

std::vector<double> half_magnitude_spectrum(std::span<const double> kernel, std::size_t n_points) {
  const auto resp = frequency_response(kernel, n_points);
  return {resp.magnitude.begin(), resp.magnitude.begin() + static_cast<std::ptrdiff_t>(n_points / 2 + 1)};
}

DistanceSet pairwise_fft_cosine(const std::vector<std::vector<double>>& filters, std::size_t n_points) {
  if (filters.size() < 2) throw ConfigError("pairwise_fft_cosine needs at least two filters");
  std::vector<std::vector<double>> spectra;
  std::vector<std::size_t> kept;
  DistanceSet out;
  for (std::size_t i = 0; i < filters.size(); ++i) {
    auto mag = half_magnitude_spectrum(filters[i], n_points);
    double norm = 0.0;
    for (auto v : mag) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) {
      out.excluded.push_back(i);
      out.warnings.push_back("filter " + std::to_string(i) + " has an all-zero spectrum; its pairs are undefined");
      continue;
    }
    for (auto& v : mag) v /= norm;
    spectra.push_back(std::move(mag));
    kept.push_back(i);
  }
  for (std::size_t a = 0; a < spectra.size(); ++a) {
    for (std::size_t b = a + 1; b < spectra.size(); ++b) {
      double dot = 0.0;
      for (std::size_t k = 0; k < spectra[a].size(); ++k) dot += spectra[a][k] * spectra[b][k];
      // Magnitudes are non-negative, so the distance lies in [0, 1].
      out.distances.push_back(std::clamp(1.0 - dot, 0.0, 2.0));
      out.pairs.emplace_back(kept[a], kept[b]);
    }
  }
  return out;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

DiversityReport diversity_report(const std::string& filter_set, const std::vector<std::vector<double>>& filters,
                                 std::size_t n_points) {
  auto set = pairwise_fft_cosine(filters, n_points);
  DiversityReport r;
  r.filter_set = filter_set;
  r.n_points = n_points;
  r.n_filters = filters.size();
  r.distances = std::move(set.distances);
  r.mean = mean_of(r.distances);
  r.median = median_of(r.distances);
  r.warnings = std::move(set.warnings);
  return r;
}

void compare_diversity(DiversityReport& report, const DiversityReport& other) {
  report.compared_with = other.filter_set;
  report.compared_mean = other.mean;
  report.compared_median = other.median;
  report.test = mann_whitney_u(report.distances, other.distances);
}

template <typename T>
std::vector<std::vector<double>> learned_filters(const FilterBank<T>& bank) {
  std::vector<std::vector<double>> out;
  for (std::size_t ch = 0; ch < bank.config().channels; ++ch) {
    for (std::size_t f = 0; f < bank.num_filters(); ++f) {
      const auto w = bank.normalized_kernel(ch, f);
      out.emplace_back(w.begin(), w.end());
    }
  }
  return out;
}

template std::vector<std::vector<double>> learned_filters(const FilterBank<float>&);
template std::vector<std::vector<double>> learned_filters(const FilterBank<double>&);

nlohmann::ordered_json to_json(const DiversityReport& r) {
  nlohmann::ordered_json j;
  j["filter_set"] = r.filter_set;
  j["n_points"] = r.n_points;
  j["n_filters"] = r.n_filters;
  j["n_pairs"] = r.distances.size();
  j["mean"] = r.mean;
  j["median"] = r.median;
  j["distances"] = r.distances;
  j["warnings"] = r.warnings;
  if (r.test) {
    j["compared_with"] = *r.compared_with;
    j["compared_mean"] = r.compared_mean;
    j["compared_median"] = r.compared_median;
    j["mann_whitney"] = to_json(*r.test);
  }
  return j;
}

}  // namespace prism
