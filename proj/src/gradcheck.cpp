// SPDX-License-Identifier: Apache-2.0
#include "prism/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace prism {

template <typename T>
void check_unique_names(const ParamList<T>& params) {
  std::unordered_set<std::string> seen;
  for (const auto* p : params) {
    if (!seen.insert(p->name).second) throw ConfigError("duplicate parameter name '" + p->name + "'");
  }
}

template void check_unique_names(const ParamList<float>&);
template void check_unique_names(const ParamList<double>&);

std::vector<Tensor<double>> finite_diff_grad(const std::function<double()>& loss,
                                             const ParamList<double>& params, double step) {
  if (!(step > 0.0)) throw ConfigError("finite_diff_grad: step must be positive");
  std::vector<Tensor<double>> grads;
  grads.reserve(params.size());
  for (auto* p : params) {
    Tensor<double> g(p->value.shape());
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + step;
      const double up = loss();
      p->value[i] = saved - step;
      const double down = loss();
      p->value[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw NumericError("finite_diff_grad: non-finite loss probing " + p->name + "[" +
                           std::to_string(i) + "]");
      }
      g[i] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

double max_relative_error(const Tensor<double>& analytic, const Tensor<double>& numeric, double floor) {
  if (analytic.shape() != numeric.shape()) {
    throw ShapeError("max_relative_error: shape mismatch " + shape_str(analytic.shape()) + " vs " +
                     shape_str(numeric.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i], floor));
  }
  return worst;
}

}  // namespace prism
