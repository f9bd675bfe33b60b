// SPDX-License-Identifier: Apache-2.0
/**
 * @file   activation_probe.hpp
 * @brief  Fingerprint of the on/off pattern of piecewise-linear activations.
 *
 * While armed, every ReLU/LeakyReLU forward pass folds the sign of each
 * input into a running hash. Two evaluations with equal fingerprints ran on
 * the same linear piece of the network.
 */
#pragma once

#include <cstdint>

namespace gedf::nn {

struct ActivationProbe {
  bool armed = false;
  std::uint64_t fingerprint = 0;

  void record(bool positive) {
    fingerprint = (fingerprint ^ (positive ? 0x9e3779b97f4a7c15ULL : 0x7f4a7c159e3779b9ULL)) *
                  0x100000001b3ULL;
  }
};

inline ActivationProbe &activation_probe() {
  thread_local ActivationProbe probe;
  return probe;
}

}  // namespace gedf::nn
