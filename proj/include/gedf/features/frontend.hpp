// SPDX-License-Identifier: Apache-2.0
/**
 * @file   frontend.hpp
 * @brief  One-pass feature extraction and the learnable 4->1 channel
 *         compression that feeds the type branch.
 */
#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "gedf/audio.hpp"
#include "gedf/features/gcc_phat.hpp"
#include "gedf/features/mel.hpp"
#include "gedf/nn/layers.hpp"

namespace gedf::features {

struct FeatureConfig {
  MelConfig mel;
  std::size_t gcc_lags = 64;
};

struct SceneFeatures {
  LogMelSpectrogram log_mel;
  GccPhatFeatures gcc;
};

/// Both feature streams from a single STFT per channel.
inline SceneFeatures extract_features(const MultiChannelAudio &audio,
                                      const FeatureConfig &cfg) {
  audio.validate();
  std::vector<ComplexSpectrogram> specs;
  for (const auto &ch : audio.channels)
    specs.push_back(stft(ch, cfg.mel.window, cfg.mel.hop));
  return {log_mel_from_stft(specs, audio.sample_rate, cfg.mel),
          gcc_phat_from_stft(specs, cfg.gcc_lags)};
}

/// 1x1 convolution over the channel axis: out[0,b,t] = sum_c w_c X[c,b,t] + bias.
/// Parameters: "<prefix>.weight" [1,4,1,1], "<prefix>.bias" [1].
class ChannelCompressor {
 public:
  explicit ChannelCompressor(std::string prefix = "compress")
      : layer_(nn::LayerSpec::conv2d(std::move(prefix), kNumChannels, 1, 1, 1)) {}

  void register_params(nn::ParameterStore &store, std::mt19937_64 &rng) const {
    nn::register_params(layer_, store, rng);
  }

  nn::Tensor forward(const nn::ParameterStore &store, const nn::Tensor &x,
                     nn::Tape *tape) const {
    if (x.rank() != 3 || x.dim(0) != kNumChannels)
      throw ShapeError("channel compression expects [4,B,T], got " +
                       nn::shape_str(x.shape));
    return nn::forward(layer_, store, x, tape);
  }

  nn::Tensor backward(nn::ParameterStore &store, const nn::Tape &tape,
                      const nn::Tensor &up) const {
    return nn::backward(layer_, store, tape, up);
  }

  const nn::LayerSpec &layer() const { return layer_; }

 private:
  nn::LayerSpec layer_;
};

inline nn::Tensor compress_channels(const LogMelSpectrogram &X,
                                    const nn::ParameterStore &store,
                                    const ChannelCompressor &compressor = ChannelCompressor()) {
  return compressor.forward(store, X.values, nullptr);
}

}  // namespace gedf::features
