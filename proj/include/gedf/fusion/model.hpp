// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model.hpp
 * @brief  The full counting network: channel compression, type branch,
 *         direction branch, frame fusion and count head.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <utility>

#include "gedf/audio.hpp"
#include "gedf/features/frontend.hpp"
#include "gedf/fusion/predictor.hpp"
#include "gedf/nn/checkpoint.hpp"
#include "gedf/vdfe/direction.hpp"
#include "gedf/vtfe/branch.hpp"

namespace gedf::fusion {

struct ModelConfig {
  features::FeatureConfig features;
  vtfe::EmbeddingBackendSpec backend;
  std::size_t theta_hidden = 128;
  std::size_t theta_out = 16;
  std::size_t phi_blocks = 2;
  std::size_t fusion_dim = 128;
  std::size_t d = 128;
  // Fixed affine standardization of log-Mel values before compression.
  double mel_offset = 0.0;
  double mel_scale = 2.0;

  std::size_t K() const { return backend.K; }

  vdfe::VdfeConfig vdfe() const {
    vdfe::VdfeConfig v;
    v.lags = features.gcc_lags;
    v.theta_hidden = theta_hidden;
    v.theta_out = theta_out;
    v.K = backend.K;
    v.phi_blocks = phi_blocks;
    return v;
  }
};

struct ModelOutput {
  nn::Tensor y;                // [4] counts
  vtfe::AdjacencyGraph A;      // [N, N]
  nn::Tensor z;                // [d] fused state
  nn::Tensor ZT, ZD;           // [K, N]
};

class GedfNet {
 public:
  explicit GedfNet(ModelConfig cfg)
      : cfg_(std::move(cfg)),
        vtfe_(cfg_.backend),
        vdfe_(cfg_.vdfe()),
        fusion_(cfg_.K(), cfg_.fusion_dim, cfg_.d),
        head_(cfg_.d) {
    if (!(cfg_.mel_scale > 0.0)) throw ConfigError("mel_scale must be positive");
  }

  const ModelConfig &config() const { return cfg_; }
  const vtfe::VtfeBranch &type_branch() const { return vtfe_; }
  const vdfe::VdfeBranch &direction_branch() const { return vdfe_; }
  const FrameFusion &fusion() const { return fusion_; }
  const CountPredictor &head() const { return head_; }

  nn::ParameterStore init_params(std::uint64_t seed) const {
    nn::ParameterStore store;
    std::mt19937_64 rng(seed);
    compressor_.register_params(store, rng);
    vtfe_.register_params(store, rng);
    vdfe_.register_params(store, rng);
    fusion_.register_params(store, rng);
    head_.register_params(store, rng);
    return store;
  }

  struct Tape {
    nn::Tape compress;
    vtfe::VtfeBranch::Tape vtfe;
    vdfe::VdfeBranch::Tape vdfe;
    FrameFusion::Tape fusion;
    std::vector<nn::Tape> head;
  };

  /// log_mel [4, B, T], gcc [6, Q, T].
  ModelOutput forward(const nn::ParameterStore &store, const nn::Tensor &log_mel,
                      const nn::Tensor &gcc, Tape *tape) const {
    nn::Tensor x = log_mel;
    for (auto &v : x.data) v = (v - cfg_.mel_offset) / cfg_.mel_scale;
    const auto xbar = compressor_.forward(store, x, tape ? &tape->compress : nullptr);
    auto vt = vtfe_.forward(store, xbar, tape ? &tape->vtfe : nullptr);
    const std::size_t N = vt.Z.dim(1);
    auto ZD = vdfe_.forward(store, gcc, N, tape ? &tape->vdfe : nullptr);
    auto z = fusion_.forward(store, vt.Z, ZD, tape ? &tape->fusion : nullptr);
    auto y = head_.forward(store, z, tape ? &tape->head : nullptr);
    return {std::move(y), std::move(vt.A), std::move(z), std::move(vt.Z), std::move(ZD)};
  }

  ModelOutput forward(const nn::ParameterStore &store, const features::SceneFeatures &f,
                      Tape *tape) const {
    return forward(store, f.log_mel.values, f.gcc.values, tape);
  }

  /// Accumulates dL/dparams for upstream dL/dy. Returns dL/d(log_mel) and
  /// dL/d(gcc).
  std::pair<nn::Tensor, nn::Tensor> backward(nn::ParameterStore &store, const Tape &tape,
                                             const nn::Tensor &dy) const {
    const auto dz = head_.backward(store, tape.head, dy);
    const auto [dZT, dZD] = fusion_.backward(store, tape.fusion, dz);
    auto dgcc = vdfe_.backward(store, tape.vdfe, dZD);
    const auto dxbar = vtfe_.backward(store, tape.vtfe, dZT);
    auto dx = compressor_.backward(store, tape.compress, dxbar);
    for (auto &v : dx.data) v /= cfg_.mel_scale;
    return {std::move(dx), std::move(dgcc)};
  }

  features::SceneFeatures features_of(const MultiChannelAudio &audio) const {
    return features::extract_features(audio, cfg_.features);
  }

 private:
  ModelConfig cfg_;
  features::ChannelCompressor compressor_;
  vtfe::VtfeBranch vtfe_;
  vdfe::VdfeBranch vdfe_;
  FrameFusion fusion_;
  CountPredictor head_;
};

/// Parameters for `net` read from a checkpoint; shapes must match exactly.
inline nn::ParameterStore load_trained(const GedfNet &net, const std::filesystem::path &path) {
  auto store = net.init_params(0);
  nn::load_checkpoint(store, path);
  return store;
}

/// Single forward pass on raw audio; returns counts and the attention graph.
inline std::pair<nn::Tensor, vtfe::AdjacencyGraph> infer(const GedfNet &net,
                                                         const nn::ParameterStore &store,
                                                         const MultiChannelAudio &audio) {
  auto out = net.forward(store, net.features_of(audio), nullptr);
  return {std::move(out.y), std::move(out.A)};
}

}  // namespace gedf::fusion
