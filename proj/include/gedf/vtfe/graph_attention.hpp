// SPDX-License-Identifier: Apache-2.0
/**
 * @file   graph_attention.hpp
 * @brief  Single-head graph attention over frame embeddings.
 *
 * Frames h_1..h_N (columns of H, K x N) form a complete graph with self
 * loops. With a learnable map M (K x K) and attention vector e (2K):
 *
 *   logit(i, j) = LeakyReLU(e^T [M h_i || M h_j])     slope 0.2
 *   A[i, :]     = softmax_j logit(i, :)
 *   Z_T[:, i]   = sum_j A[i, j] M h_j + h_i
 */
#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <utility>

#include "gedf/error.hpp"
#include "gedf/nn/layers.hpp"

namespace gedf::vtfe {

struct GraphAttentionNames {
  std::string map = "attn.map";  // weight stored as "<map>.weight" [K, K]
  std::string vec = "attn.e";    // [2K]
};

/// Row-stochastic attention graph, N x N.
using AdjacencyGraph = nn::Tensor;

/// Z_T[:, i] = sum_j a_ij (M h_j) + h_i, evaluated directly.
inline nn::Tensor aggregate(const AdjacencyGraph &A, const nn::Tensor &H,
                            const nn::Tensor &M) {
  if (H.rank() != 2) throw ShapeError("H must be K x N, got " + nn::shape_str(H.shape));
  const std::size_t K = H.dim(0), N = H.dim(1);
  nn::require_shape(A, {N, N}, "adjacency graph");
  nn::require_shape(M, {K, K}, "attention map M");
  nn::Tensor MH({K, N});
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t n = 0; n < N; ++n) {
      double acc = 0.0;
      for (std::size_t l = 0; l < K; ++l) acc += M.at(k, l) * H.at(l, n);
      MH.at(k, n) = acc;
    }
  nn::Tensor Z = H;
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t j = 0; j < N; ++j) {
      const double a = A.at(i, j);
      for (std::size_t k = 0; k < K; ++k) Z.at(k, i) += a * MH.at(k, j);
    }
  return Z;
}

class GraphAttention {
 public:
  explicit GraphAttention(std::size_t K, GraphAttentionNames names = {})
      : K_(K),
        names_(std::move(names)),
        map_(nn::LayerSpec::linear(names_.map, K, K, /*bias=*/false)) {}

  std::size_t K() const { return K_; }
  const std::string &map_name() const { return map_.name; }
  std::string map_weight_name() const { return map_.name + ".weight"; }
  const std::string &vec_name() const { return names_.vec; }

  /// M ~ fan-in uniform, e ~ U(-1/sqrt(2K), 1/sqrt(2K)).
  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    nn::register_params(map_, store, rng);
    auto &e = store.add(names_.vec, {2 * K_});
    nn::init_uniform_fan_in(e.value, 2 * K_, rng);
  }

  struct Tape {
    nn::Tensor HT, MHT, A;
    nn::Tape map_tape, act_tape, softmax_tape;
  };

  struct Output {
    nn::Tensor Z;             // [K, N]
    AdjacencyGraph A;         // [N, N]
  };

  Output forward(const nn::ParameterStore &store, const nn::Tensor &H, Tape *tape) const {
    if (H.rank() != 2 || H.dim(0) != K_)
      throw ShapeError("graph attention expects [" + std::to_string(K_) + ",N], got " +
                       nn::shape_str(H.shape));
    const std::size_t N = H.dim(1);
    if (N == 0) throw EmptyInputError("graph attention needs at least one frame");
    const nn::Tensor &e = store.value(names_.vec);
    nn::require_shape(e, {2 * K_}, names_.vec);

    nn::Tape map_tape, act_tape, sm_tape;
    const nn::Tensor HT = nn::transpose(H);  // [N, K], row i = h_i
    const nn::Tensor MHT = nn::forward(map_, store, HT, &map_tape);

    nn::Tensor logits({N, N});
    std::vector<double> s1(N, 0.0), s2(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < K_; ++k) {
        s1[i] += e[k] * MHT.at(i, k);
        s2[i] += e[K_ + k] * MHT.at(i, k);
      }
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) logits.at(i, j) = s1[i] + s2[j];
    const auto act = nn::forward(nn::LayerSpec::leaky_relu(), store, logits, &act_tape);
    auto A = nn::forward(nn::LayerSpec::softmax_rows(), store, act, &sm_tape);

    nn::Tensor Z({K_, N});
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < K_; ++k) {
        double acc = H.at(k, i);
        for (std::size_t j = 0; j < N; ++j) acc += A.at(i, j) * MHT.at(j, k);
        Z.at(k, i) = acc;
      }
    if (tape) {
      tape->HT = HT;
      tape->MHT = MHT;
      tape->A = A;
      tape->map_tape = std::move(map_tape);
      tape->act_tape = std::move(act_tape);
      tape->softmax_tape = std::move(sm_tape);
    }
    return {std::move(Z), std::move(A)};
  }

  /// Accumulates dM, de and returns dL/dH for upstream dL/dZ_T.
  nn::Tensor backward(nn::ParameterStore &store, const Tape &tape, const nn::Tensor &dZ) const {
    const std::size_t N = tape.A.dim(0);
    nn::require_shape(dZ, {K_, N}, "graph attention upstream gradient");
    const nn::Tensor &e = store.value(names_.vec);
    nn::Tensor &de = store.grad(names_.vec);
    const nn::Tensor &MHT = tape.MHT;
    const nn::Tensor &A = tape.A;

    nn::Tensor dHT({N, K_});
    nn::Tensor dA({N, N});
    nn::Tensor dMHT({N, K_});
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < K_; ++k) dHT.at(i, k) = dZ.at(k, i);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < K_; ++k) {
          acc += dZ.at(k, i) * MHT.at(j, k);
          dMHT.at(j, k) += A.at(i, j) * dZ.at(k, i);
        }
        dA.at(i, j) = acc;
      }
    const auto dact = nn::backward(nn::LayerSpec::softmax_rows(), store, tape.softmax_tape, dA);
    const auto dlogits = nn::backward(nn::LayerSpec::leaky_relu(), store, tape.act_tape, dact);
    std::vector<double> ds1(N, 0.0), ds2(N, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        ds1[i] += dlogits.at(i, j);
        ds2[j] += dlogits.at(i, j);
      }
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t k = 0; k < K_; ++k) {
        de[k] += ds1[i] * MHT.at(i, k);
        de[K_ + k] += ds2[i] * MHT.at(i, k);
        dMHT.at(i, k) += ds1[i] * e[k] + ds2[i] * e[K_ + k];
      }
    add_inplace(dHT, nn::backward(map_, store, tape.map_tape, dMHT));
    return nn::transpose(dHT);
  }

 private:
  std::size_t K_;
  GraphAttentionNames names_;
  nn::LayerSpec map_;
};

/// Attention graph only.
inline AdjacencyGraph attention_coefficients(const nn::Tensor &H,
                                             const nn::ParameterStore &store,
                                             const GraphAttention &attn) {
  return attn.forward(store, H, nullptr).A;
}

}  // namespace gedf::vtfe
