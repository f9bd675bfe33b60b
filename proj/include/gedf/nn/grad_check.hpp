// SPDX-License-Identifier: Apache-2.0
/**
 * @file   grad_check.hpp
 * @brief  Central finite-difference verification of analytic gradients.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "gedf/nn/activation_probe.hpp"
#include "gedf/nn/parameter_store.hpp"

namespace gedf::nn {

/// Scalar objective over a parameter store. When `with_grad` is true the
/// function must also accumulate dL/dp into the store's gradients.
using LossFunction = std::function<double(ParameterStore &, bool with_grad)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
  std::size_t refined = 0;  // entries whose step was shrunk to avoid a kink
};

namespace detail {

/// Evaluates the loss and returns the activation pattern it ran on.
inline std::uint64_t loss_pattern(ParameterStore &store, const LossFunction &loss,
                                  double &value) {
  auto &probe = activation_probe();
  probe.armed = true;
  probe.fingerprint = 0;
  value = loss(store, false);
  probe.armed = false;
  return probe.fingerprint;
}

}  // namespace detail

/// Compares every parameter entry's analytic gradient against
/// (L(p+eps) - L(p-eps)) / 2eps. Relative error uses the denominator
/// max(|a|, |n|, 1e-8). When a step would cross a ReLU/LeakyReLU kink the
/// difference quotient mixes two linear pieces, so eps is shrunk for that
/// entry until both probes stay on the piece of the base point.
inline GradCheckResult grad_check_detailed(ParameterStore &store,
                                           const LossFunction &loss,
                                           double epsilon = 1e-3) {
  constexpr double kMinStep = 1e-9;
  store.zero_grad();
  loss(store, true);
  double base_value = 0.0;
  const std::uint64_t base = detail::loss_pattern(store, loss, base_value);
  GradCheckResult res;
  for (auto &p : store.params()) {
    const Tensor analytic = p.grad;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value.data[i];
      double step = epsilon;
      double lp = 0.0, lm = 0.0;
      bool refined = false;
      for (;;) {
        p.value.data[i] = saved + step;
        const std::uint64_t fp = detail::loss_pattern(store, loss, lp);
        p.value.data[i] = saved - step;
        const std::uint64_t fm = detail::loss_pattern(store, loss, lm);
        if ((fp == base && fm == base) || step / 4.0 < kMinStep) break;
        step /= 4.0;
        refined = true;
      }
      p.value.data[i] = saved;
      if (refined) ++res.refined;
      const double num = (lp - lm) / (2.0 * step);
      const double ana = analytic.data[i];
      const double denom = std::max({std::abs(ana), std::abs(num), 1e-8});
      const double rel = std::abs(ana - num) / denom;
      ++res.checked;
      if (res.worst_parameter.empty() || rel > res.max_relative_error) {
        res.max_relative_error = rel;
        res.worst_parameter = p.name;
        res.worst_index = i;
        res.analytic = ana;
        res.numeric = num;
      }
    }
  }
  store.zero_grad();
  return res;
}

inline double grad_check(ParameterStore &store, const LossFunction &loss,
                         double epsilon = 1e-3) {
  return grad_check_detailed(store, loss, epsilon).max_relative_error;
}

/// Fixed random projection used as a scalar loss head: L = sum_i w_i * out_i.
inline Tensor random_projection(const Shape &shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Tensor w(shape);
  for (auto &v : w.data) v = dist(rng);
  return w;
}

inline double project(const Tensor &out, const Tensor &w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) acc += out.data[i] * w.data[i];
  return acc;
}

}  // namespace gedf::nn
