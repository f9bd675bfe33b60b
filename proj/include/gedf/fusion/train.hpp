// SPDX-License-Identifier: Apache-2.0
/**
 * @file   train.hpp
 * @brief  End-to-end training loop over a manifest, with a per-epoch loss log.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "gedf/fusion/model.hpp"
#include "gedf/nn/optimizer.hpp"
#include "gedf/synth/dataset.hpp"

namespace gedf::fusion {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (batch == 0) throw ConfigError("batch must be at least 1");
    if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  }
};

using CountTarget = std::array<double, kNumCategories>;

inline CountTarget target_of(const synth::SceneLabel &label) {
  CountTarget t{};
  for (std::size_t c = 0; c < kNumCategories; ++c) t[c] = label.counts[c];
  return t;
}

struct TrainSample {
  features::SceneFeatures features;
  CountTarget target{};
};

struct TrainResult {
  nn::ParameterStore store;
  std::vector<double> epoch_losses;  // index 0 is epoch 1
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Loads every manifest row and extracts its features once.
inline std::vector<TrainSample> load_training_set(const GedfNet &net,
                                                  const std::filesystem::path &manifest) {
  const auto rows = synth::read_manifest(manifest);
  std::vector<TrainSample> out;
  out.reserve(rows.size());
  for (const auto &row : rows)
    out.push_back({net.features_of(synth::load_scene_audio(manifest, row)), target_of(row.label)});
  return out;
}

/// Loss and parameter gradients for one sample; gradients accumulate in store.
inline double sample_loss_and_grad(const GedfNet &net, nn::ParameterStore &store,
                                   const TrainSample &s, double grad_scale) {
  GedfNet::Tape tape;
  const auto out = net.forward(store, s.features, &tape);
  const double loss = count_loss(out.y, s.target);
  auto dy = count_loss_grad(out.y, s.target);
  for (auto &v : dy.data) v *= grad_scale;
  net.backward(store, tape, dy);
  return loss;
}

/// Mini-batch Adam from the seeded initialization. Gradients are averaged
/// over each batch; the epoch loss is the mean per-sample loss.
inline TrainResult train_on_samples(const GedfNet &net, const std::vector<TrainSample> &samples,
                                    const TrainConfig &cfg, const EpochCallback &on_epoch = {}) {
  cfg.validate();
  TrainResult res{net.init_params(cfg.seed), {}};
  if (cfg.epochs > 0 && samples.empty())
    throw EmptyInputError("training set is empty");
  nn::AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.lr;
  nn::Adam adam(adam_cfg);
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch) {
      const std::size_t end = std::min(order.size(), start + cfg.batch);
      const double scale = 1.0 / static_cast<double>(end - start);
      res.store.zero_grad();
      for (std::size_t i = start; i < end; ++i) {
        const double l = sample_loss_and_grad(net, res.store, samples[order[i]], scale);
        if (!std::isfinite(l))
          throw DivergedError("loss became non-finite in epoch " + std::to_string(epoch));
        total += l;
      }
      try {
        adam.step(res.store);
      } catch (const DivergedError &e) {
        throw DivergedError("epoch " + std::to_string(epoch) + ": " + e.what());
      }
    }
    const double mean = total / static_cast<double>(samples.size());
    res.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  res.store.zero_grad();
  return res;
}

inline TrainResult train(const GedfNet &net, const std::filesystem::path &manifest,
                         const TrainConfig &cfg, const EpochCallback &on_epoch = {}) {
  cfg.validate();
  return train_on_samples(net, load_training_set(net, manifest), cfg, on_epoch);
}

/// Comma-separated `epoch,mean_loss` rows, no header.
inline std::string format_loss_log(const std::vector<double> &losses) {
  std::string out;
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i + 1, losses[i]);
    out += buf;
  }
  return out;
}

inline void write_loss_log(const std::filesystem::path &path, const std::vector<double> &losses) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << format_loss_log(losses);
  if (!os) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace gedf::fusion
