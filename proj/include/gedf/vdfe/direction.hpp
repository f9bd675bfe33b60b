// SPDX-License-Identifier: Apache-2.0
/**
 * @file   direction.hpp
 * @brief  Direction branch: per-frame lag-vector MLP, temporal conv encoder
 *         and adaptive average pooling onto the type branch's frame grid.
 *
 *   D [6, Q, T] --theta (per pair, per frame)--> [6*K_in, T]
 *               --phi (conv 1x3 + LeakyReLU blocks)--> [K, T]
 *               --adaptive avg pool over time--> [K, N]
 */
#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/features/gcc_phat.hpp"
#include "gedf/nn/layers.hpp"

namespace gedf::vdfe {

struct VdfeConfig {
  std::size_t lags = 64;          // Q
  std::size_t theta_hidden = 128;
  std::size_t theta_out = 16;     // K_in per pair
  std::size_t K = 64;
  std::size_t phi_blocks = 2;
  std::size_t phi_kernel = 3;

  void validate() const {
    if (lags == 0 || theta_hidden == 0 || theta_out == 0 || K == 0)
      throw ConfigError("direction branch widths must be positive");
    if (phi_blocks == 0) throw ConfigError("phi_blocks must be at least 1");
    if (phi_kernel % 2 == 0) throw ConfigError("phi_kernel must be odd");
  }
};

/// Mean over frames [floor(n T / N), floor((n+1) T / N)) for each output n.
inline nn::Tensor adaptive_avg_pool_time(const nn::Tensor &x, std::size_t n_target) {
  if (x.rank() != 2) throw ShapeError("expected [K,T], got " + nn::shape_str(x.shape));
  if (n_target == 0 || n_target > x.dim(1))
    throw PoolingError("cannot pool " + std::to_string(x.dim(1)) + " frames to " +
                       std::to_string(n_target));
  return nn::forward(nn::LayerSpec::adaptive_avg_pool(0, n_target), nn::ParameterStore{}, x,
                     nullptr);
}

class VdfeBranch {
 public:
  explicit VdfeBranch(VdfeConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    theta_.layers = {
        nn::LayerSpec::linear("vdfe.theta0", cfg_.lags, cfg_.theta_hidden),
        nn::LayerSpec::leaky_relu(),
        nn::LayerSpec::linear("vdfe.theta1", cfg_.theta_hidden, cfg_.theta_out),
    };
    std::size_t in = features::kNumPairs * cfg_.theta_out;
    for (std::size_t b = 0; b < cfg_.phi_blocks; ++b) {
      phi_.layers.push_back(nn::LayerSpec::conv2d("vdfe.phi" + std::to_string(b), in, cfg_.K,
                                                  1, cfg_.phi_kernel));
      phi_.layers.push_back(nn::LayerSpec::leaky_relu());
      in = cfg_.K;
    }
  }

  const VdfeConfig &config() const { return cfg_; }

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    theta_.register_params(store, rng);
    phi_.register_params(store, rng);
  }

  struct Tape {
    std::vector<nn::Tape> theta, phi;
    nn::Tape pool;
    std::size_t frames = 0;
  };

  /// Z_D [K, n_target].
  nn::Tensor forward(const nn::ParameterStore &store, const nn::Tensor &D,
                     std::size_t n_target, Tape *tape) const {
    if (D.rank() != 3 || D.dim(0) != features::kNumPairs || D.dim(1) != cfg_.lags)
      throw ShapeError("direction branch expects [6," + std::to_string(cfg_.lags) +
                       ",T], got " + nn::shape_str(D.shape));
    const std::size_t P = features::kNumPairs, Q = cfg_.lags, T = D.dim(2);
    if (n_target == 0 || n_target > T)
      throw PoolingError("cannot pool " + std::to_string(T) + " frames to " +
                         std::to_string(n_target) + " (upsampling is out of contract)");
    // Rows ordered (pair, frame), each the Q-lag vector.
    nn::Tensor rows({P * T, Q});
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t t = 0; t < T; ++t) rows.at(p * T + t, q) = D.at(p, q, t);
    const auto th = theta_.forward(store, rows, tape ? &tape->theta : nullptr);
    // Concatenate pair outputs on the feature axis: [P*K_in, 1, T].
    const std::size_t Kin = cfg_.theta_out;
    nn::Tensor feat({P * Kin, 1, T});
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < Kin; ++k) feat.at(p * Kin + k, 0, t) = th.at(p * T + t, k);
    const auto enc = phi_.forward(store, feat, tape ? &tape->phi : nullptr);
    const auto pool = nn::LayerSpec::adaptive_avg_pool(0, n_target);
    auto z = nn::forward(pool, store, enc.reshaped({cfg_.K, T}), tape ? &tape->pool : nullptr);
    if (tape) tape->frames = T;
    return z;
  }

  /// Accumulates parameter gradients; returns dL/dD.
  nn::Tensor backward(nn::ParameterStore &store, const Tape &tape, const nn::Tensor &dZ) const {
    const std::size_t P = features::kNumPairs, Q = cfg_.lags, T = tape.frames;
    const std::size_t Kin = cfg_.theta_out;
    const auto pool = nn::LayerSpec::adaptive_avg_pool(0, dZ.dim(1));
    const auto denc = nn::backward(pool, store, tape.pool, dZ).reshaped({cfg_.K, 1, T});
    const auto dfeat = phi_.backward(store, tape.phi, denc);
    nn::Tensor dth({P * T, Kin});
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t k = 0; k < Kin; ++k) dth.at(p * T + t, k) = dfeat.at(p * Kin + k, 0, t);
    const auto drows = theta_.backward(store, tape.theta, dth);
    nn::Tensor dD({P, Q, T});
    for (std::size_t p = 0; p < P; ++p)
      for (std::size_t q = 0; q < Q; ++q)
        for (std::size_t t = 0; t < T; ++t) dD.at(p, q, t) = drows.at(p * T + t, q);
    return dD;
  }

 private:
  VdfeConfig cfg_;
  nn::Sequential theta_, phi_;
};

/// Convenience wrapper: Z_D = AvgPool(Phi(Theta(D))).
inline nn::Tensor direction_features(const features::GccPhatFeatures &D,
                                     const nn::ParameterStore &store,
                                     const VdfeBranch &branch, std::size_t n_target) {
  return branch.forward(store, D.values, n_target, nullptr);
}

}  // namespace gedf::vdfe
