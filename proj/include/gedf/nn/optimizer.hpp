// SPDX-License-Identifier: Apache-2.0
/**
 * @file   optimizer.hpp
 * @brief  First-order parameter updates: plain gradient step and Adam.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/parameter_store.hpp"

namespace gedf::nn {

namespace detail {
inline void require_finite_grads(const ParameterStore &store) {
  for (const auto &p : store.params())
    for (double g : p.grad.data)
      if (!std::isfinite(g))
        throw DivergedError("non-finite gradient in '" + p.name + "'");
}
}  // namespace detail

/// p <- p - lr * g, then zero the gradients.
inline void sgd_step(ParameterStore &store, double learning_rate) {
  detail::require_finite_grads(store);
  for (auto &p : store.params())
    for (std::size_t i = 0; i < p.value.size(); ++i)
      p.value.data[i] -= learning_rate * p.grad.data[i];
  store.zero_grad();
}

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. State is laid out in the store's
/// parameter order, so one Adam instance belongs to one store layout.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(ParameterStore &store) {
    detail::require_finite_grads(store);
    auto &params = store.params();
    if (m_.empty()) {
      for (const auto &p : params) {
        m_.emplace_back(p.value.size(), 0.0);
        v_.emplace_back(p.value.size(), 0.0);
      }
    }
    if (m_.size() != params.size())
      throw ContractError("optimizer state does not match parameter store");
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto &p = params[k];
      auto &m = m_[k];
      auto &v = v_[k];
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double g = p.grad.data[i];
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double mh = m[i] / c1, vh = v[i] / c2;
        p.value.data[i] -=
            config_.learning_rate * mh / (std::sqrt(vh) + config_.epsilon);
      }
    }
    store.zero_grad();
  }

  std::size_t steps() const { return t_; }

 private:
  AdamConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace gedf::nn
