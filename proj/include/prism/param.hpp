// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "prism/tensor.hpp"

namespace prism {

/// A learnable tensor with its gradient buffer.
template <typename T>
struct Param {
  Param(std::string param_name, Tensor<T> initial)
      : name(std::move(param_name)), value(std::move(initial)), grad(value.shape()) {}

  void zero_grad() { grad.fill(T{0}); }

  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

template <typename T>
using ParamList = std::vector<Param<T>*>;

/// Throws ConfigError on a duplicate name.
template <typename T>
void check_unique_names(const ParamList<T>& params);

template <typename T>
std::size_t count_elements(const ParamList<T>& params) {
  std::size_t n = 0;
  for (const auto* p : params) n += p->value.size();
  return n;
}

}  // namespace prism
