// SPDX-License-Identifier: Apache-2.0
#include "prism/optim.hpp"

#include <cmath>

namespace prism {

template <typename T>
AdamW<T>::AdamW(ParamList<T> params, AdamWConfig config) : params_(std::move(params)), config_(config) {
  if (!(config_.lr >= 0.0)) throw ConfigError("learning rate must be >= 0");
  if (!(config_.weight_decay >= 0.0)) throw ConfigError("weight decay must be >= 0");
  if (!(config_.beta1 >= 0.0 && config_.beta1 < 1.0) || !(config_.beta2 >= 0.0 && config_.beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  for (const auto* p : params_) {
    m_.emplace_back(p->value.size(), 0.0);
    v_.emplace_back(p->value.size(), 0.0);
  }
}

template <typename T>
void AdamW<T>::step() {
  for (const auto* p : params_) {
    for (auto g : p->grad.data()) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p->name);
    }
  }
  ++step_;
  const double t = static_cast<double>(step_);
  const double bc1 = 1.0 - std::pow(config_.beta1, t);
  const double bc2 = 1.0 - std::pow(config_.beta2, t);
  const double decay = 1.0 - config_.lr * config_.weight_decay;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      double theta = static_cast<double>(p.value[i]) * decay;
      theta -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.eps);
      p.value[i] = static_cast<T>(theta);
    }
  }
}

template class AdamW<float>;
template class AdamW<double>;

}  // namespace prism
