// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gcc_phat.hpp
 * @brief  Frame-wise GCC-PHAT lag maps for the six unordered channel pairs.
 *
 * Lag axis: index q holds lag (q - Q/2) samples, so lag 0 sits at index Q/2.
 * A positive lag means channel k lags channel c, i.e. the peak of the (c, k)
 * map is at +d when x_k(t) = x_c(t - d).
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gedf/audio.hpp"
#include "gedf/features/stft.hpp"
#include "gedf/nn/tensor.hpp"

namespace gedf::features {

inline constexpr std::size_t kNumPairs = 6;

/// Fixed pair order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4), zero-based here.
inline constexpr std::array<std::pair<std::size_t, std::size_t>, kNumPairs>
    kChannelPairs = {{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// values: [6, Q, T].
struct GccPhatFeatures {
  nn::Tensor values;

  std::size_t lags() const { return values.dim(1); }
  std::size_t frames() const { return values.dim(2); }
};

inline long lag_of_index(std::size_t q, std::size_t num_lags) {
  return static_cast<long>(q) - static_cast<long>(num_lags / 2);
}

/// [Q, T] lag map for one channel pair.
inline nn::Tensor gcc_phat_pair(const ComplexSpectrogram &pc,
                                const ComplexSpectrogram &pk,
                                std::size_t num_lags) {
  if (pc.bins != pk.bins || pc.frames != pk.frames || pc.window != pk.window)
    throw ShapeError("GCC-PHAT pair spectrograms differ: " +
                     std::to_string(pc.bins) + "x" + std::to_string(pc.frames) +
                     " vs " + std::to_string(pk.bins) + "x" +
                     std::to_string(pk.frames));
  const std::size_t n = pc.window;
  if (num_lags == 0 || num_lags > n)
    throw ConfigError("GCC-PHAT lag count must be in [1, window], got " +
                      std::to_string(num_lags));
  nn::Tensor out({num_lags, pc.frames});
  std::vector<Complex> cross(pc.bins);
  for (std::size_t t = 0; t < pc.frames; ++t) {
    for (std::size_t f = 0; f < pc.bins; ++f) {
      const Complex g = pc.at(f, t) * std::conj(pk.at(f, t));
      const double mag = std::abs(g);
      cross[f] = mag > 0.0 ? g / mag : Complex(1.0, 0.0);
    }
    const auto r = irfft(cross, n);
    for (std::size_t q = 0; q < num_lags; ++q) {
      const long lag = lag_of_index(q, num_lags);
      const long idx = ((-lag) % static_cast<long>(n) + static_cast<long>(n)) %
                       static_cast<long>(n);
      out.at(q, t) = r[static_cast<std::size_t>(idx)];
    }
  }
  return out;
}

inline GccPhatFeatures gcc_phat_from_stft(const std::vector<ComplexSpectrogram> &specs,
                                          std::size_t num_lags) {
  if (specs.size() != kNumChannels)
    throw ShapeError("GCC-PHAT needs 4 channel spectrograms, got " +
                     std::to_string(specs.size()));
  GccPhatFeatures out;
  out.values = nn::Tensor({kNumPairs, num_lags, specs[0].frames});
  for (std::size_t p = 0; p < kNumPairs; ++p) {
    const auto [c, k] = kChannelPairs[p];
    const auto map = gcc_phat_pair(specs[c], specs[k], num_lags);
    std::copy(map.data.begin(), map.data.end(),
              out.values.data.begin() + static_cast<long>(p * map.size()));
  }
  return out;
}

inline GccPhatFeatures gcc_phat_all(const MultiChannelAudio &audio,
                                    std::size_t num_lags, std::size_t window,
                                    std::size_t hop) {
  audio.validate();
  std::vector<ComplexSpectrogram> specs;
  for (const auto &ch : audio.channels) specs.push_back(stft(ch, window, hop));
  return gcc_phat_from_stft(specs, num_lags);
}

/// Per-frame argmax lag (in samples) of a [Q, T] map.
inline std::vector<long> argmax_lags(const nn::Tensor &map) {
  const std::size_t Q = map.dim(0), T = map.dim(1);
  std::vector<long> out(T);
  for (std::size_t t = 0; t < T; ++t) {
    std::size_t best = 0;
    for (std::size_t q = 1; q < Q; ++q)
      if (map.at(q, t) > map.at(best, t)) best = q;
    out[t] = lag_of_index(best, Q);
  }
  return out;
}

}  // namespace gedf::features
