// SPDX-License-Identifier: Apache-2.0
/**
 * @file   commands.hpp
 * @brief  Subcommand implementations. Every command writes into an output
 *         directory and echoes its effective configuration there.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gedf/cli/config.hpp"
#include "gedf/eval/heatmap.hpp"
#include "gedf/eval/report.hpp"
#include "gedf/fusion/model.hpp"
#include "gedf/fusion/train.hpp"
#include "gedf/synth/dataset.hpp"
#include "gedf/synth/scene.hpp"

namespace gedf::cli {

inline constexpr const char *kMixedPreset = "mixed";

inline void prepare_out_dir(const std::filesystem::path &out, const RunConfig &cfg,
                            const std::string &command) {
  if (out.empty()) throw UsageError("an output directory is required (--out)");
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create '" + out.string() + "': " + ec.message());
  const auto path = out / ("effective_config." + command + ".txt");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << cfg.format();
}

inline void require_file(const std::filesystem::path &p, const char *what) {
  if (p.empty()) throw UsageError(std::string(what) + " path is required");
  if (!std::filesystem::is_regular_file(p))
    throw IoError(std::string(what) + " '" + p.string() + "' does not exist");
}

/// Generates `count` scenes under the configured preset (or a seeded random
/// preset per scene for 'mixed'). Returns the manifest path.
inline std::filesystem::path cmd_synth(const RunConfig &cfg, std::size_t count,
                                       const std::filesystem::path &out) {
  const auto &preset = cfg.text("preset");
  if (preset != kMixedPreset) {
    try {
      synth::find_preset(preset);
    } catch (const ConfigError &) {
      throw UsageError("unknown preset '" + preset + "' (valid: " + synth::preset_names() +
                       ", " + kMixedPreset + ")");
    }
  }
  const auto &fmt = cfg.text("audio_format");
  if (fmt != "float32" && fmt != "pcm16")
    throw UsageError("audio_format must be float32 or pcm16, got '" + fmt + "'");
  const auto opt = cfg.scene_options();
  prepare_out_dir(out, cfg, "synth");
  synth::DatasetWriter writer(out, fmt == "pcm16" ? synth::SampleFormat::pcm16
                                                  : synth::SampleFormat::float32);
  std::mt19937_64 rng(cfg.seed());
  std::uniform_int_distribution<std::size_t> pick(0, synth::kLocationPresets.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::string name =
        preset == kMixedPreset ? synth::kLocationPresets[pick(rng)].name : preset;
    const auto scene_cfg = synth::random_scene_config(name, opt, rng);
    auto [audio, label] = synth::synth_scene(scene_cfg, rng());
    writer.add({"", std::move(audio), label, name});
  }
  return writer.finish();
}

struct TrainOutputs {
  std::filesystem::path checkpoint, loss_log;
  std::vector<double> losses;
};

/// Trains on `manifest`; writes checkpoint.bin and loss_log.csv into `out`.
inline TrainOutputs cmd_train(const RunConfig &cfg, const std::filesystem::path &manifest,
                              const std::filesystem::path &out, std::ostream *progress = nullptr) {
  require_file(manifest, "manifest");
  const fusion::GedfNet net(cfg.model_config());
  const auto tcfg = cfg.train_config();
  prepare_out_dir(out, cfg, "train");
  TrainOutputs res{out / "checkpoint.bin", out / "loss_log.csv", {}};
  auto trained = fusion::train(net, manifest, tcfg, [&](std::size_t epoch, double loss) {
    if (progress) *progress << "epoch " << epoch << " mean_loss " << loss << '\n';
  });
  nn::save_checkpoint(trained.store, res.checkpoint);
  fusion::write_loss_log(res.loss_log, trained.epoch_losses);
  res.losses = std::move(trained.epoch_losses);
  return res;
}

inline std::string system_name(const std::filesystem::path &ckpt, std::set<std::string> &used) {
  std::string name = ckpt.parent_path().filename().string();
  if (name.empty() || used.count(name)) name = ckpt.string();
  used.insert(name);
  return name;
}

/// Evaluates the first checkpoint into report.txt. With `rank`, every
/// checkpoint is evaluated and the ranking section lists all of them.
inline std::filesystem::path cmd_eval(const RunConfig &cfg,
                                      const std::vector<std::filesystem::path> &checkpoints,
                                      const std::filesystem::path &manifest,
                                      const std::filesystem::path &out, bool rank) {
  if (checkpoints.empty()) throw UsageError("at least one --checkpoint is required");
  require_file(manifest, "manifest");
  for (const auto &c : checkpoints) require_file(c, "checkpoint");
  const fusion::GedfNet net(cfg.model_config());
  prepare_out_dir(out, cfg, "eval");
  eval::MetricsReport first;
  eval::RankingInput systems;
  std::set<std::string> used;
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (i > 0 && !rank) break;
    const auto store = fusion::load_trained(net, checkpoints[i]);
    auto rep = eval::evaluate(net, store, manifest);
    systems.emplace_back(system_name(checkpoints[i], used), rep.grid);
    if (i == 0) first = std::move(rep);
  }
  if (rank) first.ranking = eval::ranking_score(systems);
  const auto path = out / "report.txt";
  eval::write_report(path, first);
  return path;
}

/// Counts for one WAV file, written as predictions.csv.
inline std::array<double, 4> cmd_infer(const RunConfig &cfg, const std::filesystem::path &checkpoint,
                                       const std::filesystem::path &audio_path,
                                       const std::filesystem::path &out) {
  require_file(checkpoint, "checkpoint");
  require_file(audio_path, "audio");
  const fusion::GedfNet net(cfg.model_config());
  const auto store = fusion::load_trained(net, checkpoint);
  const auto audio = synth::read_wav(audio_path);
  prepare_out_dir(out, cfg, "infer");
  const auto [y, A] = fusion::infer(net, store, audio);
  std::array<double, 4> counts{};
  const auto path = out / "predictions.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << "filename,car_left,car_right,cv_left,cv_right\n" << audio_path.filename().string();
  char buf[40];
  for (std::size_t c = 0; c < 4; ++c) {
    counts[c] = y[c];
    std::snprintf(buf, sizeof(buf), ",%.17g", y[c]);
    os << buf;
  }
  os << '\n';
  return counts;
}

/// Writes adjacency.pgm and its raw sidecar adjacency.pgm.txt.
inline std::filesystem::path cmd_visualize(const RunConfig &cfg,
                                           const std::filesystem::path &checkpoint,
                                           const std::filesystem::path &audio_path,
                                           const std::filesystem::path &out) {
  require_file(checkpoint, "checkpoint");
  require_file(audio_path, "audio");
  const fusion::GedfNet net(cfg.model_config());
  const auto store = fusion::load_trained(net, checkpoint);
  const auto audio = synth::read_wav(audio_path);
  prepare_out_dir(out, cfg, "visualize");
  const auto [y, A] = fusion::infer(net, store, audio);
  const auto path = out / "adjacency.pgm";
  eval::export_adjacency_heatmap(A, cfg.count("upsample"), path);
  return path;
}

}  // namespace gedf::cli
