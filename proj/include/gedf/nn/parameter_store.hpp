// SPDX-License-Identifier: Apache-2.0
/**
 * @file   parameter_store.hpp
 * @brief  Named parameters with matching gradient accumulators.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/tensor.hpp"

namespace gedf::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
};

/// Insertion-ordered parameter collection. Iteration order is the order in
/// which parameters were added, which keeps checkpoints and optimizer state
/// deterministic.
class ParameterStore {
 public:
  Parameter &add(const std::string &name, Shape shape) {
    if (index_.count(name))
      throw ContractError("duplicate parameter name '" + name + "'");
    index_.emplace(name, params_.size());
    Tensor value(shape);
    Tensor grad(std::move(shape));
    params_.push_back({name, std::move(value), std::move(grad)});
    return params_.back();
  }

  bool contains(const std::string &name) const { return index_.count(name); }

  Parameter &get(const std::string &name) {
    auto it = index_.find(name);
    if (it == index_.end())
      throw ContractError("unknown parameter '" + name + "'");
    return params_[it->second];
  }
  const Parameter &get(const std::string &name) const {
    auto it = index_.find(name);
    if (it == index_.end())
      throw ContractError("unknown parameter '" + name + "'");
    return params_[it->second];
  }

  Tensor &value(const std::string &name) { return get(name).value; }
  const Tensor &value(const std::string &name) const {
    return get(name).value;
  }
  Tensor &grad(const std::string &name) { return get(name).grad; }
  const Tensor &grad(const std::string &name) const { return get(name).grad; }

  std::vector<Parameter> &params() { return params_; }
  const std::vector<Parameter> &params() const { return params_; }
  std::size_t size() const { return params_.size(); }

  std::size_t num_values() const {
    std::size_t n = 0;
    for (const auto &p : params_) n += p.value.size();
    return n;
  }

  void zero_grad() {
    for (auto &p : params_) std::fill(p.grad.data.begin(), p.grad.data.end(), 0.0);
  }

  /// Adds another store's gradients into this one; both must hold the same
  /// parameter layout.
  void accumulate_grads(const ParameterStore &other, double scale = 1.0) {
    if (other.params_.size() != params_.size())
      throw ContractError("gradient accumulation across different layouts");
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto &dst = params_[i].grad.data;
      const auto &src = other.params_[i].grad.data;
      if (dst.size() != src.size() || params_[i].name != other.params_[i].name)
        throw ContractError("gradient accumulation mismatch at '" +
                            params_[i].name + "'");
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
    }
  }

  void copy_values_from(const ParameterStore &other) {
    if (other.params_.size() != params_.size())
      throw ContractError("value copy across different layouts");
    for (std::size_t i = 0; i < params_.size(); ++i)
      params_[i].value.data = other.params_[i].value.data;
  }

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Fan-in scaled uniform init, U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
inline void init_uniform_fan_in(Tensor &t, std::size_t fan_in,
                                std::mt19937_64 &rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto &v : t.data) v = dist(rng);
}

}  // namespace gedf::nn
