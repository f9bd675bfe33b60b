// SPDX-License-Identifier: Apache-2.0
/**
 * @file   branch.hpp
 * @brief  Type branch: embedding backend followed by graph attention.
 */
#pragma once

#include <random>

#include "gedf/vtfe/embedding.hpp"
#include "gedf/vtfe/graph_attention.hpp"

namespace gedf::vtfe {

class VtfeBranch {
 public:
  explicit VtfeBranch(EmbeddingBackendSpec spec)
      : backend_(std::move(spec)), attention_(backend_.spec().K) {}

  const EmbeddingBackend &backend() const { return backend_; }
  const GraphAttention &attention() const { return attention_; }

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    backend_.register_params(store, rng);
    attention_.register_params(store, rng);
    if (backend_.spec().kind == BackendKind::loaded_weights)
      backend_.load_weights(store, backend_.spec().weights);
  }

  struct Tape {
    EmbeddingBackend::Tape backend;
    GraphAttention::Tape attention;
  };

  struct Output {
    nn::Tensor H;       // [K, N] embeddings
    nn::Tensor Z;       // [K, N] type features
    AdjacencyGraph A;   // [N, N]
  };

  /// [1, B, T] compressed spectrogram -> (Z_T, A).
  Output forward(const nn::ParameterStore &store, const nn::Tensor &xbar, Tape *tape) const {
    auto H = backend_.forward(store, xbar, tape ? &tape->backend : nullptr);
    auto att = attention_.forward(store, H, tape ? &tape->attention : nullptr);
    return {std::move(H), std::move(att.Z), std::move(att.A)};
  }

  nn::Tensor backward(nn::ParameterStore &store, const Tape &tape, const nn::Tensor &dZ) const {
    const auto dH = attention_.backward(store, tape.attention, dZ);
    return backend_.backward(store, tape.backend, dH);
  }

 private:
  EmbeddingBackend backend_;
  GraphAttention attention_;
};

}  // namespace gedf::vtfe
