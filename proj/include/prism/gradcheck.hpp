// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "prism/param.hpp"

namespace prism {

/// Central-difference gradient of a scalar function of `params`.
///
/// Each coordinate is probed at theta +/- step and restored bit-exactly
/// afterwards. Throws NumericError if any probe evaluates to a non-finite value.
std::vector<Tensor<double>> finite_diff_grad(const std::function<double()>& loss,
                                             const ParamList<double>& params, double step = 1e-5);

/// |a - b| / max(|a|, |b|, floor). The floor keeps near-zero gradients from
/// turning round-off into large relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-6);

double max_relative_error(const Tensor<double>& analytic, const Tensor<double>& numeric,
                          double floor = 1e-6);

}  // namespace prism
