// SPDX-License-Identifier: Apache-2.0
/**
 * @file   stft.hpp
 * @brief  Hann-windowed short-time Fourier transform.
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/features/fft.hpp"

namespace gedf::features {

/// F x T complex spectrogram stored frame-major: bin f of frame t lives at
/// values[t * bins + f].
struct ComplexSpectrogram {
  std::size_t bins = 0;    // F = window / 2 + 1
  std::size_t frames = 0;  // T
  std::size_t window = 0;
  std::size_t hop = 0;
  std::vector<Complex> values;

  Complex &at(std::size_t f, std::size_t t) { return values[t * bins + f]; }
  const Complex &at(std::size_t f, std::size_t t) const {
    return values[t * bins + f];
  }
  std::span<const Complex> frame(std::size_t t) const {
    return {values.data() + t * bins, bins};
  }
};

/// Periodic Hann window of length n.
inline std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n));
  return w;
}

inline std::size_t frame_count(std::size_t length, std::size_t window,
                               std::size_t hop) {
  return (length - window) / hop + 1;
}

inline ComplexSpectrogram stft(std::span<const double> signal,
                               std::size_t window, std::size_t hop) {
  if (window == 0 || (window & (window - 1)) != 0)
    throw ConfigError("STFT window must be a power of two, got " +
                      std::to_string(window));
  if (hop == 0) throw ConfigError("STFT hop must be positive");
  if (signal.size() < window)
    throw InputTooShortError("signal of " + std::to_string(signal.size()) +
                             " samples is shorter than the " +
                             std::to_string(window) + "-sample window");
  ComplexSpectrogram spec;
  spec.window = window;
  spec.hop = hop;
  spec.bins = window / 2 + 1;
  spec.frames = frame_count(signal.size(), window, hop);
  spec.values.resize(spec.bins * spec.frames);
  const auto w = hann_window(window);
  std::vector<double> buf(window);
  for (std::size_t t = 0; t < spec.frames; ++t) {
    const double *src = signal.data() + t * hop;
    for (std::size_t i = 0; i < window; ++i) buf[i] = src[i] * w[i];
    const auto X = rfft(buf);
    std::copy(X.begin(), X.end(), spec.values.begin() + static_cast<long>(t * spec.bins));
  }
  return spec;
}

}  // namespace gedf::features
