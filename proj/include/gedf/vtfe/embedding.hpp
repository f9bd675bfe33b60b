// SPDX-License-Identifier: Apache-2.0
/**
 * @file   embedding.hpp
 * @brief  Frame-embedding backend for the type branch.
 *
 * The builtin backend is a small CNN over the compressed [1, B, T]
 * spectrogram: each block is conv3x3 -> LeakyReLU -> average pooling that
 * halves the mel axis; the first block also pools time by the configured
 * factor. The head averages the remaining mel rows, leaving [K, N] with
 * N = ceil(T / pool_factor).
 *
 * The loaded-weights backend has the same topology but takes its weights
 * from a checkpoint file instead of random initialization.
 */
#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/checkpoint.hpp"
#include "gedf/nn/layers.hpp"

namespace gedf::vtfe {

enum class BackendKind { builtin_cnn, loaded_weights };

struct EmbeddingBackendSpec {
  BackendKind kind = BackendKind::builtin_cnn;
  std::size_t blocks = 4;
  std::size_t channels = 16;  // hidden conv channels
  std::size_t K = 64;         // output feature dimension
  std::size_t pool_factor = 4;
  std::filesystem::path weights;  // loaded_weights only

  void validate() const {
    if (blocks == 0) throw ConfigError("backend blocks must be at least 1");
    if (K == 0 || channels == 0) throw ConfigError("backend widths must be positive");
    if (pool_factor == 0) throw ConfigError("pool_factor must be at least 1");
    if (kind == BackendKind::loaded_weights && weights.empty())
      throw ConfigError("loaded_weights backend needs a weights path");
  }
};

inline constexpr const char *kBackendPrefix = "backend";

inline std::size_t embedded_frames(std::size_t T, std::size_t pool_factor) {
  return (T + pool_factor - 1) / pool_factor;
}

class EmbeddingBackend {
 public:
  explicit EmbeddingBackend(EmbeddingBackendSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
  }

  const EmbeddingBackendSpec &spec() const { return spec_; }

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    layers_for(2, 1).register_params(store, rng);
  }

  /// Replaces the backend's parameters with those stored at `path`. Only
  /// records under the backend prefix are consulted; shape mismatches are
  /// reported together.
  void load_weights(nn::ParameterStore &store, const std::filesystem::path &path) const {
    nn::ParameterStore backend_only;
    std::mt19937_64 rng(0);
    register_params(backend_only, rng);
    auto records = nn::decode_checkpoint(nn::read_bytes(path), path.string());
    std::erase_if(records, [](const nn::CheckpointRecord &r) {
      return r.name.rfind(std::string(kBackendPrefix) + ".", 0) != 0;
    });
    nn::apply_records(backend_only, records, "backend weights '" + path.string() + "'");
    for (const auto &p : backend_only.params()) store.value(p.name).data = p.value.data;
  }

  /// Layer chain for an input of B mel bins and T frames.
  nn::Sequential layers_for(std::size_t B, std::size_t T) const {
    nn::Sequential seq;
    std::size_t h = B, in = 1;
    for (std::size_t b = 0; b < spec_.blocks; ++b) {
      const std::size_t out = b + 1 == spec_.blocks ? spec_.K : spec_.channels;
      seq.layers.push_back(nn::LayerSpec::conv2d(
          std::string(kBackendPrefix) + ".conv" + std::to_string(b), in, out, 3, 3));
      seq.layers.push_back(nn::LayerSpec::leaky_relu());
      h = std::max<std::size_t>(1, h / 2);
      const std::size_t w = b == 0 ? embedded_frames(T, spec_.pool_factor) : 0;
      seq.layers.push_back(nn::LayerSpec::adaptive_avg_pool(h, w));
      in = out;
    }
    seq.layers.push_back(nn::LayerSpec::adaptive_avg_pool(1, 0));
    return seq;
  }

  struct Tape {
    nn::Sequential seq;
    std::vector<nn::Tape> tapes;
  };

  /// [1, B, T] -> [K, N].
  nn::Tensor forward(const nn::ParameterStore &store, const nn::Tensor &x,
                     Tape *tape) const {
    if (x.rank() != 3 || x.dim(0) != 1)
      throw ShapeError("embedding backend expects [1,B,T], got " + nn::shape_str(x.shape));
    auto seq = layers_for(x.dim(1), x.dim(2));
    auto y = seq.forward(store, x, tape ? &tape->tapes : nullptr);
    const std::size_t N = y.dim(2);
    if (tape) tape->seq = std::move(seq);
    return y.reshaped({spec_.K, N});
  }

  nn::Tensor backward(nn::ParameterStore &store, const Tape &tape,
                      const nn::Tensor &up) const {
    const auto g = up.reshaped({spec_.K, 1, up.dim(1)});
    return tape.seq.backward(store, tape.tapes, g);
  }

 private:
  EmbeddingBackendSpec spec_;
};

}  // namespace gedf::vtfe
