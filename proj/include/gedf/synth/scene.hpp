// SPDX-License-Identifier: Apache-2.0
/**
 * @file   scene.hpp
 * @brief  Free-field pass-by simulator for a four-microphone linear array.
 *
 * Geometry: microphones sit on the x axis (channel 1 leftmost), the lane is
 * the line y = lane_distance. A vehicle moves at constant speed and passes
 * x = array centre at t_closest; left_to_right means increasing x.
 *
 * Each channel receives the event's source waveform delayed by
 * (|s - m_c| - |s - m_ref|) / c relative to the array centre and scaled by
 * 1 / |s - m_c|. The common propagation delay is not modelled, so there is
 * no Doppler pitch shift.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gedf/audio.hpp"
#include "gedf/error.hpp"

namespace gedf::synth {

inline constexpr double kSpeedOfSound = 343.0;  // m/s

enum class VehicleType { car, commercial };
enum class Direction { left_to_right, right_to_left };

struct VehicleEvent {
  VehicleType type = VehicleType::car;
  Direction direction = Direction::left_to_right;
  double speed_kmh = 50.0;
  double t_closest = 0.0;  // seconds
  double source_gain = 1.0;
};

struct LocationPreset {
  const char *name;
  double max_speed_kmh;
  double max_density_per_min;
};

/// Per-location caps (max pass-by speed, max traffic density per minute).
inline constexpr std::array<LocationPreset, 6> kLocationPresets = {{
    {"loc1", 100.0, 1000.0},
    {"loc2", 50.0, 900.0},
    {"loc3", 50.0, 500.0},
    {"loc4", 50.0, 400.0},
    {"loc5", 40.0, 140.0},
    {"loc6", 90.0, 900.0},
}};

inline std::string preset_names() {
  std::string s;
  for (const auto &p : kLocationPresets) {
    if (!s.empty()) s += ", ";
    s += p.name;
  }
  return s;
}

inline const LocationPreset &find_preset(const std::string &name) {
  for (const auto &p : kLocationPresets)
    if (name == p.name) return p;
  throw ConfigError("location_preset: unknown preset '" + name +
                    "' (valid: " + preset_names() + ")");
}

struct SceneConfig {
  double duration_s = 10.0;
  double sample_rate = 16000.0;
  std::array<double, kNumChannels> mic_positions = {0.0, 0.1, 0.2, 0.3};
  double lane_distance = 4.0;
  std::vector<VehicleEvent> events;
  double noise_level = 0.001;
  std::string location_preset = "loc1";

  double array_centre() const {
    double s = 0.0;
    for (double m : mic_positions) s += m;
    return s / static_cast<double>(kNumChannels);
  }

  std::size_t num_samples() const {
    return static_cast<std::size_t>(std::llround(duration_s * sample_rate));
  }

  void validate() const {
    if (!(duration_s > 0.0) || !std::isfinite(duration_s))
      throw ConfigError("duration_s: must be positive");
    if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
      throw ConfigError("sample_rate: must be positive");
    if (!(lane_distance > 0.0) || !std::isfinite(lane_distance))
      throw ConfigError("lane_distance: must be positive");
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level))
      throw ConfigError("noise_level: must be non-negative");
    for (std::size_t i = 1; i < kNumChannels; ++i)
      if (!(mic_positions[i] > mic_positions[i - 1]))
        throw ConfigError("mic_positions: must be strictly increasing");
    const auto &preset = find_preset(location_preset);
    for (std::size_t i = 0; i < events.size(); ++i) {
      const auto &e = events[i];
      const std::string field = "events[" + std::to_string(i) + "]";
      if (!(e.speed_kmh > 0.0))
        throw ConfigError(field + ".speed: must be positive");
      if (e.speed_kmh > preset.max_speed_kmh)
        throw ConfigError(field + ".speed: " + std::to_string(e.speed_kmh) +
                          " km/h exceeds the " + preset.name + " cap of " +
                          std::to_string(preset.max_speed_kmh));
      if (!(e.t_closest >= 0.0 && e.t_closest <= duration_s))
        throw ConfigError(field + ".t_closest: outside [0, duration_s]");
      if (!(e.source_gain >= 0.0) || !std::isfinite(e.source_gain))
        throw ConfigError(field + ".source_gain: must be non-negative");
    }
  }
};

/// Counts ordered (car_left, car_right, cv_left, cv_right); "left" is
/// left_to_right travel.
struct SceneLabel {
  std::array<int, 4> counts = {0, 0, 0, 0};

  int total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
  bool operator==(const SceneLabel &) const = default;
};

inline std::size_t label_index(VehicleType type, Direction dir) {
  return (type == VehicleType::car ? 0 : 2) +
         (dir == Direction::left_to_right ? 0 : 1);
}

inline SceneLabel label_of(const std::vector<VehicleEvent> &events) {
  SceneLabel label;
  for (const auto &e : events) ++label.counts[label_index(e.type, e.direction)];
  return label;
}

/// Source x position at time t (y is always lane_distance).
inline double source_x(const SceneConfig &config, const VehicleEvent &event,
                       double t) {
  const double v = event.speed_kmh / 3.6;
  const double sign = event.direction == Direction::left_to_right ? 1.0 : -1.0;
  return config.array_centre() + sign * v * (t - event.t_closest);
}

inline double distance_to_mic(const SceneConfig &config, double x,
                              std::size_t mic) {
  const double dx = x - config.mic_positions[mic];
  return std::sqrt(dx * dx + config.lane_distance * config.lane_distance);
}

/// (|s - m_c| - |s - m_k|) / 343 at source position x.
inline double delay_at_position(const SceneConfig &config, double x,
                                std::size_t c, std::size_t k) {
  return (distance_to_mic(config, x, c) - distance_to_mic(config, x, k)) /
         kSpeedOfSound;
}

/// Inter-channel delay in seconds for channel pair (c, k), zero-based.
/// Positive when the source is closer to k than to c.
inline double pass_by_delay_profile(const SceneConfig &config,
                                    const VehicleEvent &event, double t,
                                    std::pair<std::size_t, std::size_t> pair) {
  if (pair.first >= kNumChannels || pair.second >= kNumChannels ||
      pair.first == pair.second)
    throw ConfigError("pair: must name two distinct channels in 1..4");
  return delay_at_position(config, source_x(config, event, t), pair.first,
                           pair.second);
}

namespace detail {

// Four-point Lagrange interpolation of x at fractional index pos.
inline double lagrange4(const std::vector<double> &x, double pos) {
  const double fl = std::floor(pos);
  const long i = static_cast<long>(fl);
  const double d = pos - fl;
  if (i < 1 || i + 2 >= static_cast<long>(x.size())) return 0.0;
  const double xm1 = x[static_cast<std::size_t>(i - 1)];
  const double x0 = x[static_cast<std::size_t>(i)];
  const double x1 = x[static_cast<std::size_t>(i + 1)];
  const double x2 = x[static_cast<std::size_t>(i + 2)];
  const double cm1 = -d * (d - 1.0) * (d - 2.0) / 6.0;
  const double c0 = (d + 1.0) * (d - 1.0) * (d - 2.0) / 2.0;
  const double c1 = -(d + 1.0) * d * (d - 2.0) / 2.0;
  const double c2 = (d + 1.0) * d * (d - 1.0) / 6.0;
  return cm1 * xm1 + c0 * x0 + c1 * x1 + c2 * x2;
}

inline constexpr double kSourceLevel = 0.2;       // amplitude at 1 m
inline constexpr double kCommercialGain = 2.0;    // +6 dB
inline constexpr std::size_t kSourceMargin = 32;  // samples either side

/// Unit-RMS source waveform: pink noise plus two engine harmonics. Commercial
/// vehicles get a low-passed noise bed and a lower fundamental.
inline std::vector<double> source_waveform(VehicleType type, std::size_t length,
                                           double sample_rate,
                                           std::mt19937_64 &rng) {
  std::normal_distribution<double> white(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> noise(length);
  // Paul Kellet's pink-noise filter.
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (auto &v : noise) {
    const double w = white(rng);
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
  }
  if (type == VehicleType::commercial) {
    const double a = std::exp(-2.0 * std::numbers::pi * 600.0 / sample_rate);
    double y = 0.0;
    for (auto &v : noise) v = y = (1.0 - a) * v + a * y;
  }
  double mean = 0.0, energy = 0.0;
  for (double v : noise) mean += v;
  mean /= static_cast<double>(length);
  for (auto &v : noise) {
    v -= mean;
    energy += v * v;
  }
  const double rms = std::sqrt(energy / static_cast<double>(length));
  if (rms > 0.0)
    for (auto &v : noise) v /= rms;

  const bool car = type == VehicleType::car;
  const double f0 = car ? 80.0 + 20.0 * unit(rng) : 40.0 + 20.0 * unit(rng);
  const double ph1 = 2.0 * std::numbers::pi * unit(rng);
  const double ph2 = 2.0 * std::numbers::pi * unit(rng);
  const double w0 = 2.0 * std::numbers::pi * f0 / sample_rate;
  for (std::size_t i = 0; i < length; ++i) {
    const double t = static_cast<double>(i);
    noise[i] += 0.5 * std::sin(w0 * t + ph1) + 0.35 * std::sin(2.0 * w0 * t + ph2);
  }
  return noise;
}

}  // namespace detail

/// Renders a scene deterministically from (config, seed).
inline std::pair<MultiChannelAudio, SceneLabel> synth_scene(const SceneConfig &config,
                                                            std::uint64_t seed) {
  config.validate();
  const std::size_t L = config.num_samples();
  if (L == 0) throw ConfigError("duration_s: shorter than one sample");
  const double fs = config.sample_rate;
  MultiChannelAudio audio(L, fs);
  std::mt19937_64 rng(seed);

  const double centre = config.array_centre();
  for (const auto &event : config.events) {
    const auto src = detail::source_waveform(event.type, L + 2 * detail::kSourceMargin,
                                             fs, rng);
    const double gain = detail::kSourceLevel * event.source_gain *
                        (event.type == VehicleType::commercial
                             ? detail::kCommercialGain
                             : 1.0);
    for (std::size_t n = 0; n < L; ++n) {
      const double x = source_x(config, event, static_cast<double>(n) / fs);
      const double dxr = x - centre;
      const double r_ref = std::sqrt(dxr * dxr + config.lane_distance * config.lane_distance);
      for (std::size_t m = 0; m < kNumChannels; ++m) {
        const double r = distance_to_mic(config, x, m);
        const double delay_samples = (r - r_ref) / kSpeedOfSound * fs;
        const double pos = static_cast<double>(n + detail::kSourceMargin) - delay_samples;
        audio.channels[m][n] += gain * detail::lagrange4(src, pos) / r;
      }
    }
  }

  if (config.noise_level > 0.0) {
    std::normal_distribution<double> white(0.0, config.noise_level);
    for (auto &ch : audio.channels)
      for (auto &v : ch) v += white(rng);
  }
  for (auto &ch : audio.channels)
    for (auto &v : ch) v = std::clamp(v, -1.0, 1.0);
  return {std::move(audio), label_of(config.events)};
}

/// Controls for drawing random scenes under a location preset.
struct RandomSceneOptions {
  double duration_s = 10.0;
  double sample_rate = 16000.0;
  double noise_level = 0.001;
  double lane_distance = 4.0;
  std::array<double, kNumChannels> mic_positions = {0.0, 0.1, 0.2, 0.3};
  int max_events_per_category = 3;
};

/// Draws per-category event counts, speeds and closest-approach times under
/// the preset's speed cap and traffic-density cap.
inline SceneConfig random_scene_config(const std::string &preset_name,
                                       const RandomSceneOptions &opt,
                                       std::mt19937_64 &rng) {
  const auto &preset = find_preset(preset_name);
  SceneConfig cfg;
  cfg.duration_s = opt.duration_s;
  cfg.sample_rate = opt.sample_rate;
  cfg.noise_level = opt.noise_level;
  cfg.lane_distance = opt.lane_distance;
  cfg.mic_positions = opt.mic_positions;
  cfg.location_preset = preset.name;
  std::uniform_int_distribution<int> count_dist(0, std::max(0, opt.max_events_per_category));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto density_cap = static_cast<std::size_t>(
      std::floor(preset.max_density_per_min * opt.duration_s / 60.0));
  for (std::size_t cat = 0; cat < 4; ++cat) {
    const int n = count_dist(rng);
    for (int i = 0; i < n; ++i) {
      if (cfg.events.size() >= density_cap) break;
      VehicleEvent e;
      e.type = cat < 2 ? VehicleType::car : VehicleType::commercial;
      e.direction = cat % 2 == 0 ? Direction::left_to_right : Direction::right_to_left;
      e.speed_kmh = preset.max_speed_kmh * (0.5 + 0.5 * unit(rng));
      e.t_closest = opt.duration_s * (0.1 + 0.8 * unit(rng));
      e.source_gain = 0.8 + 0.4 * unit(rng);
      cfg.events.push_back(e);
    }
  }
  return cfg;
}

}  // namespace gedf::synth
