// SPDX-License-Identifier: Apache-2.0
/**
 * @file   predictor.hpp
 * @brief  Frame-level fusion (MLP + GRU, last step) and the ReLU count head.
 */
#pragma once

#include <array>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/layers.hpp"

namespace gedf::fusion {

inline constexpr std::size_t kNumCategories = 4;
inline constexpr double kPredictorBiasInit = 0.1;

/// Per frame n: concat(Z_T[:, n], Z_D[:, n]) -> Linear + LeakyReLU -> GRU.
/// Only the final hidden state is returned.
class FrameFusion {
 public:
  FrameFusion(std::size_t K, std::size_t fusion_dim, std::size_t hidden)
      : K_(K), hidden_(hidden) {
    theta_.layers = {nn::LayerSpec::linear("fusion.theta", 2 * K, fusion_dim),
                     nn::LayerSpec::leaky_relu()};
    gru_ = nn::LayerSpec::gru("fusion.gru", fusion_dim, hidden);
  }

  std::size_t hidden() const { return hidden_; }

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    theta_.register_params(store, rng);
    nn::register_params(gru_, store, rng);
  }

  struct Tape {
    std::vector<nn::Tape> theta;
    nn::Tape gru;
    std::size_t frames = 0;
  };

  /// z_TD [d].
  nn::Tensor forward(const nn::ParameterStore &store, const nn::Tensor &ZT,
                     const nn::Tensor &ZD, Tape *tape) const {
    if (ZT.rank() != 2 || ZD.rank() != 2)
      throw ShapeError("fusion expects [K,N] inputs");
    if (ZT.dim(1) != ZD.dim(1))
      throw AlignmentError("type branch has N=" + std::to_string(ZT.dim(1)) +
                           " frames, direction branch has N=" + std::to_string(ZD.dim(1)));
    if (ZT.dim(0) != K_ || ZD.dim(0) != K_)
      throw ShapeError("fusion expects K=" + std::to_string(K_) + " features per branch, got " +
                       std::to_string(ZT.dim(0)) + " and " + std::to_string(ZD.dim(0)));
    const std::size_t N = ZT.dim(1);
    nn::Tensor x({N, 2 * K_});
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t k = 0; k < K_; ++k) {
        x.at(n, k) = ZT.at(k, n);
        x.at(n, K_ + k) = ZD.at(k, n);
      }
    const auto u = theta_.forward(store, x, tape ? &tape->theta : nullptr);
    const auto hs = nn::forward(gru_, store, u, tape ? &tape->gru : nullptr);
    if (tape) tape->frames = N;
    nn::Tensor z({hidden_});
    for (std::size_t j = 0; j < hidden_; ++j) z[j] = hs.at(N - 1, j);
    return z;
  }

  /// Returns (dZ_T, dZ_D).
  std::pair<nn::Tensor, nn::Tensor> backward(nn::ParameterStore &store, const Tape &tape,
                                             const nn::Tensor &dz) const {
    const std::size_t N = tape.frames;
    nn::Tensor dhs({N, hidden_});
    for (std::size_t j = 0; j < hidden_; ++j) dhs.at(N - 1, j) = dz[j];
    const auto du = nn::backward(gru_, store, tape.gru, dhs);
    const auto dx = theta_.backward(store, tape.theta, du);
    nn::Tensor dZT({K_, N}), dZD({K_, N});
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t k = 0; k < K_; ++k) {
        dZT.at(k, n) = dx.at(n, k);
        dZD.at(k, n) = dx.at(n, K_ + k);
      }
    return {std::move(dZT), std::move(dZD)};
  }

 private:
  std::size_t K_, hidden_;
  nn::Sequential theta_;
  nn::LayerSpec gru_;
};

/// y = ReLU(W z + b), four outputs ordered (car_left, car_right, cv_left, cv_right).
class CountPredictor {
 public:
  explicit CountPredictor(std::size_t hidden) {
    head_.layers = {nn::LayerSpec::linear("predictor", hidden, kNumCategories),
                    nn::LayerSpec::relu()};
  }

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    head_.register_params(store, rng);
    auto &b = store.value("predictor.bias");
    std::fill(b.data.begin(), b.data.end(), kPredictorBiasInit);
  }

  nn::Tensor forward(const nn::ParameterStore &store, const nn::Tensor &z,
                     std::vector<nn::Tape> *tapes) const {
    return head_.forward(store, z, tapes);
  }

  nn::Tensor backward(nn::ParameterStore &store, const std::vector<nn::Tape> &tapes,
                      const nn::Tensor &dy) const {
    return head_.backward(store, tapes, dy);
  }

 private:
  nn::Sequential head_;
};

inline nn::Tensor predict_counts(const nn::Tensor &z, const nn::ParameterStore &store,
                                 const CountPredictor &head) {
  return head.forward(store, z, nullptr);
}

/// Mean squared error over the four categories.
inline double count_loss(const nn::Tensor &y, const std::array<double, kNumCategories> &target) {
  nn::require_shape(y, {kNumCategories}, "count prediction");
  double acc = 0.0;
  for (std::size_t c = 0; c < kNumCategories; ++c) {
    const double d = y[c] - target[c];
    acc += d * d;
  }
  return acc / static_cast<double>(kNumCategories);
}

inline nn::Tensor count_loss_grad(const nn::Tensor &y,
                                  const std::array<double, kNumCategories> &target) {
  nn::Tensor g({kNumCategories});
  for (std::size_t c = 0; c < kNumCategories; ++c)
    g[c] = 2.0 * (y[c] - target[c]) / static_cast<double>(kNumCategories);
  return g;
}

}  // namespace gedf::fusion
