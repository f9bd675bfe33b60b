// SPDX-License-Identifier: Apache-2.0
/**
 * @file   mel.hpp
 * @brief  Triangular mel filterbank and four-channel log-Mel spectrogram.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gedf/audio.hpp"
#include "gedf/features/stft.hpp"
#include "gedf/nn/tensor.hpp"

namespace gedf::features {

struct MelConfig {
  std::size_t window = 1024;
  std::size_t hop = 320;
  std::size_t bins = 64;
  double fmin = 50.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
};

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

/// B x F matrix of triangular filters with peaks equally spaced on the mel
/// scale; filter b rises from edge b to edge b+1 and falls to edge b+2.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t num_bins, std::size_t fft_size, double sample_rate,
                double fmin, double fmax)
      : bins_(num_bins), fft_bins_(fft_size / 2 + 1) {
    if (num_bins == 0) throw ConfigError("mel bin count must be at least 1");
    if (!(fmin >= 0.0 && fmax > fmin && fmax <= sample_rate / 2.0 + 1e-9))
      throw ConfigError("mel range must satisfy 0 <= fmin < fmax <= sample_rate/2");
    const double m0 = hz_to_mel(fmin), m1 = hz_to_mel(fmax);
    std::vector<double> edges(num_bins + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
      edges[i] = mel_to_hz(m0 + (m1 - m0) * static_cast<double>(i) /
                                    static_cast<double>(num_bins + 1));
    weights_.assign(bins_ * fft_bins_, 0.0);
    for (std::size_t b = 0; b < bins_; ++b) {
      const double lo = edges[b], mid = edges[b + 1], hi = edges[b + 2];
      for (std::size_t k = 0; k < fft_bins_; ++k) {
        const double f = static_cast<double>(k) * sample_rate /
                         static_cast<double>(fft_size);
        double w = 0.0;
        if (f > lo && f <= mid) w = (f - lo) / (mid - lo);
        else if (f > mid && f < hi) w = (hi - f) / (hi - mid);
        weights_[b * fft_bins_ + k] = w;
      }
    }
    // Nonzero support of each triangle, so apply() skips the zeros.
    support_.assign(bins_, {0, 0});
    for (std::size_t b = 0; b < bins_; ++b) {
      std::size_t first = fft_bins_, last = 0;
      for (std::size_t k = 0; k < fft_bins_; ++k)
        if (weights_[b * fft_bins_ + k] != 0.0) {
          first = std::min(first, k);
          last = k + 1;
        }
      if (first < last) support_[b] = {first, last};
    }
  }

  std::size_t bins() const { return bins_; }
  std::size_t fft_bins() const { return fft_bins_; }
  double weight(std::size_t b, std::size_t k) const {
    return weights_[b * fft_bins_ + k];
  }

  /// Mel energies of one power-spectrum frame.
  void apply(const double *power, double *out) const {
    for (std::size_t b = 0; b < bins_; ++b) {
      const double *w = weights_.data() + b * fft_bins_;
      double acc = 0.0;
      for (std::size_t k = support_[b].first; k < support_[b].second; ++k) acc += w[k] * power[k];
      out[b] = acc;
    }
  }

 private:
  std::size_t bins_, fft_bins_;
  std::vector<double> weights_;
  std::vector<std::pair<std::size_t, std::size_t>> support_;
};

/// values: [4, B, T] tensor of log(max(mel power, floor)).
struct LogMelSpectrogram {
  nn::Tensor values;
  double mel_fmin = 0.0;
  double mel_fmax = 0.0;
  double log_floor = 0.0;

  std::size_t bins() const { return values.dim(1); }
  std::size_t frames() const { return values.dim(2); }
};

/// Log-Mel of already-computed channel spectrograms.
inline LogMelSpectrogram log_mel_from_stft(
    const std::vector<ComplexSpectrogram> &specs, double sample_rate,
    const MelConfig &cfg) {
  const std::size_t T = specs.at(0).frames;
  MelFilterbank fb(cfg.bins, cfg.window, sample_rate, cfg.fmin, cfg.fmax);
  LogMelSpectrogram out;
  out.mel_fmin = cfg.fmin;
  out.mel_fmax = cfg.fmax;
  out.log_floor = cfg.log_floor;
  out.values = nn::Tensor({specs.size(), cfg.bins, T});
  const double log_floor = std::log(cfg.log_floor);
  std::vector<double> power(fb.fft_bins()), mel(cfg.bins);
  for (std::size_t c = 0; c < specs.size(); ++c) {
    if (specs[c].frames != T || specs[c].bins != fb.fft_bins())
      throw ShapeError("channel spectrograms disagree in shape");
    for (std::size_t t = 0; t < T; ++t) {
      const auto frame = specs[c].frame(t);
      for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(frame[k]);
      fb.apply(power.data(), mel.data());
      for (std::size_t b = 0; b < cfg.bins; ++b)
        out.values.at(c, b, t) =
            mel[b] > cfg.log_floor ? std::log(mel[b]) : log_floor;
    }
  }
  return out;
}

inline LogMelSpectrogram log_mel(const MultiChannelAudio &audio,
                                 const MelConfig &cfg) {
  audio.validate();
  std::vector<ComplexSpectrogram> specs;
  for (const auto &ch : audio.channels) specs.push_back(stft(ch, cfg.window, cfg.hop));
  return log_mel_from_stft(specs, audio.sample_rate, cfg);
}

}  // namespace gedf::features
