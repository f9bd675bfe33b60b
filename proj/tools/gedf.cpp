// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gedf.cpp
 * @brief  Command-line front end: synth, train, eval, infer, visualize.
 */
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gedf/cli/commands.hpp"

namespace fs = std::filesystem;

int main(int argc, char **argv) {
  CLI::App app{"Acoustic traffic counting: scene synthesis, training and evaluation"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "key = value configuration file");
  auto *seed_opt = app.add_option("--seed", seed, "overrides the 'seed' key");
  app.add_option("--out", out, "output directory");
  app.add_option("--set", overrides, "key=value override (repeatable)");

  std::size_t count = 0;
  auto *synth = app.add_subcommand("synth", "generate a labeled scene dataset");
  synth->add_option("--count", count, "number of scenes")->required();

  std::string manifest;
  auto *train = app.add_subcommand("train", "train on a manifest");
  train->add_option("--manifest", manifest, "dataset manifest")->required();

  std::vector<std::string> checkpoints;
  bool rank = false;
  auto *eval = app.add_subcommand("eval", "score checkpoints on a manifest");
  eval->add_option("--checkpoint", checkpoints, "checkpoint file (repeatable)")->required();
  eval->add_option("--manifest", manifest, "dataset manifest")->required();
  eval->add_flag("--rank", rank, "add a ranking section over all checkpoints");

  std::string checkpoint, audio;
  auto *infer = app.add_subcommand("infer", "predict counts for one recording");
  infer->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  infer->add_option("--audio", audio, "4-channel WAV file")->required();

  auto *vis = app.add_subcommand("visualize", "export the attention heatmap of one recording");
  vis->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  vis->add_option("--audio", audio, "4-channel WAV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    gedf::cli::RunConfig cfg;
    if (!config_path.empty()) cfg.merge_file(config_path);
    for (const auto &o : overrides) cfg.merge_assignment(o);
    if (*seed_opt) cfg.set("seed", std::to_string(seed));

    if (synth->parsed()) {
      std::cout << gedf::cli::cmd_synth(cfg, count, out).string() << '\n';
    } else if (train->parsed()) {
      const auto res = gedf::cli::cmd_train(cfg, manifest, out, &std::cout);
      std::cout << res.checkpoint.string() << '\n';
    } else if (eval->parsed()) {
      std::vector<fs::path> paths(checkpoints.begin(), checkpoints.end());
      std::cout << gedf::cli::cmd_eval(cfg, paths, manifest, out, rank).string() << '\n';
    } else if (infer->parsed()) {
      const auto y = gedf::cli::cmd_infer(cfg, checkpoint, audio, out);
      std::printf("car_left %.6f\ncar_right %.6f\ncv_left %.6f\ncv_right %.6f\n", y[0], y[1],
                  y[2], y[3]);
    } else if (vis->parsed()) {
      std::cout << gedf::cli::cmd_visualize(cfg, checkpoint, audio, out).string() << '\n';
    }
  } catch (const gedf::Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
