// SPDX-License-Identifier: Apache-2.0
/**
 * @file   audio.hpp
 * @brief  Four-channel audio container shared by the simulator, the
 *         feature front-end and file I/O.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gedf/error.hpp"

namespace gedf {

inline constexpr std::size_t kNumChannels = 4;

struct MultiChannelAudio {
  std::array<std::vector<double>, kNumChannels> channels;
  double sample_rate = 16000.0;

  MultiChannelAudio() = default;
  MultiChannelAudio(std::size_t length, double rate) : sample_rate(rate) {
    for (auto &c : channels) c.assign(length, 0.0);
  }

  std::size_t length() const { return channels[0].size(); }

  /// Throws ShapeError / ConfigError when the container breaks its
  /// invariants (4 equal non-empty channels, finite samples in [-1, 1]).
  void validate() const {
    const std::size_t L = channels[0].size();
    if (L == 0) throw ShapeError("audio has zero-length channels");
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      if (channels[c].size() != L)
        throw ShapeError("channel " + std::to_string(c + 1) + " has " +
                         std::to_string(channels[c].size()) +
                         " samples, channel 1 has " + std::to_string(L));
      for (double v : channels[c])
        if (!std::isfinite(v) || v < -1.0 || v > 1.0)
          throw ConfigError("channel " + std::to_string(c + 1) +
                            " holds a sample outside [-1, 1]");
    }
    if (!(sample_rate > 0.0)) throw ConfigError("sample_rate must be positive");
  }
};

}  // namespace gedf
