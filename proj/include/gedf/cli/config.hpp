// SPDX-License-Identifier: Apache-2.0
/**
 * @file   config.hpp
 * @brief  Flat `key = value` run configuration with a fixed schema.
 *
 * Precedence: compiled defaults < config file < command-line overrides.
 * Unknown keys and malformed values are rejected with the offending key.
 */
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/fusion/model.hpp"
#include "gedf/fusion/train.hpp"
#include "gedf/synth/scene.hpp"

namespace gedf::cli {

enum class ValueKind { count, positive_count, real, positive_real, text, seed };

struct KeySpec {
  const char *key;
  ValueKind kind;
  const char *default_value;
  const char *help;
};

// clang-format off
inline const std::vector<KeySpec> &config_schema() {
  static const std::vector<KeySpec> schema = {
      // scenes
      {"preset", ValueKind::text, "loc1", "location preset loc1..loc6, or 'mixed'"},
      {"duration", ValueKind::positive_real, "10", "scene length in seconds"},
      {"sample_rate", ValueKind::positive_real, "16000", "Hz"},
      {"noise_level", ValueKind::real, "0.001", "additive white-noise amplitude"},
      {"lane_distance", ValueKind::positive_real, "4", "metres from array to lane"},
      {"max_events", ValueKind::count, "3", "max events per category per scene"},
      {"audio_format", ValueKind::text, "float32", "float32 or pcm16"},
      // features
      {"window", ValueKind::positive_count, "1024", "STFT window (power of two)"},
      {"hop", ValueKind::positive_count, "320", "STFT hop"},
      {"B", ValueKind::positive_count, "64", "mel bins"},
      {"fmin", ValueKind::real, "50", "lowest mel edge, Hz"},
      {"fmax", ValueKind::positive_real, "8000", "highest mel edge, Hz"},
      {"log_floor", ValueKind::positive_real, "1e-10", "clamp before log"},
      {"Q", ValueKind::positive_count, "64", "retained GCC-PHAT lags"},
      // type branch
      {"backend", ValueKind::text, "builtin_cnn", "builtin_cnn or loaded_weights"},
      {"backend_weights", ValueKind::text, "", "checkpoint with backend.* records"},
      {"blocks", ValueKind::positive_count, "4", "backend conv blocks"},
      {"channels", ValueKind::positive_count, "16", "backend hidden channels"},
      {"K", ValueKind::positive_count, "64", "feature dimension of both branches"},
      {"pool", ValueKind::positive_count, "4", "temporal pooling factor, N = ceil(T/pool)"},
      // direction branch
      {"theta_hidden", ValueKind::positive_count, "128", "lag MLP hidden width"},
      {"K_in", ValueKind::positive_count, "16", "lag MLP output width per pair"},
      {"phi_blocks", ValueKind::positive_count, "2", "temporal conv blocks"},
      // fusion and head
      {"d_in", ValueKind::positive_count, "128", "fusion MLP width"},
      {"d", ValueKind::positive_count, "128", "GRU hidden size"},
      {"mel_offset", ValueKind::real, "0", "log-mel standardization offset"},
      {"mel_scale", ValueKind::positive_real, "2", "log-mel standardization scale"},
      // training
      {"lr", ValueKind::positive_real, "0.001", "Adam learning rate"},
      {"epochs", ValueKind::count, "50", "training epochs"},
      {"batch", ValueKind::positive_count, "8", "mini-batch size"},
      {"seed", ValueKind::seed, "0", "seed for synthesis, init and shuffling"},
      // visualization
      {"upsample", ValueKind::positive_count, "8", "heatmap upsampling factor"},
  };
  return schema;
}
// clang-format on

class RunConfig {
 public:
  RunConfig() {
    for (const auto &k : config_schema()) values_[k.key] = k.default_value;
  }

  static const KeySpec &spec_of(const std::string &key) {
    for (const auto &k : config_schema())
      if (key == k.key) return k;
    throw ConfigError("unknown key '" + key + "'");
  }

  void set(const std::string &key, const std::string &value) {
    const auto &spec = spec_of(key);
    check_value(spec, value);
    values_[key] = value;
  }

  /// Parses `key = value` (or `key=value`) with `#` comments.
  void merge_text(const std::string &text, const std::string &source) {
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      const auto where = source + ":" + std::to_string(line_no);
      if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
      try {
        set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
      } catch (const ConfigError &e) {
        throw ConfigError(where + ": " + e.what());
      }
    }
  }

  void merge_file(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    merge_text(ss.str(), path.string());
  }

  /// `key=value` override as given on the command line.
  void merge_assignment(const std::string &assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override '" + assignment + "' is not key=value");
    set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
  }

  const std::string &text(const std::string &key) const {
    spec_of(key);
    return values_.at(key);
  }
  std::size_t count(const std::string &key) const { return std::stoull(text(key)); }
  double real(const std::string &key) const { return std::stod(text(key)); }
  std::uint64_t seed() const { return std::stoull(text("seed")); }

  /// Effective configuration in schema order, loadable by merge_text.
  std::string format() const {
    std::string out;
    for (const auto &k : config_schema())
      out += std::string(k.key) + " = " + values_.at(k.key) + "\n";
    return out;
  }

  features::FeatureConfig feature_config() const {
    features::FeatureConfig f;
    f.mel.window = count("window");
    f.mel.hop = count("hop");
    f.mel.bins = count("B");
    f.mel.fmin = real("fmin");
    f.mel.fmax = real("fmax");
    f.mel.log_floor = real("log_floor");
    f.gcc_lags = count("Q");
    return f;
  }

  fusion::ModelConfig model_config() const {
    fusion::ModelConfig m;
    m.features = feature_config();
    const auto &backend = text("backend");
    if (backend == "builtin_cnn") {
      m.backend.kind = vtfe::BackendKind::builtin_cnn;
    } else if (backend == "loaded_weights") {
      m.backend.kind = vtfe::BackendKind::loaded_weights;
      m.backend.weights = text("backend_weights");
    } else {
      throw ConfigError("backend: expected builtin_cnn or loaded_weights, got '" + backend + "'");
    }
    m.backend.blocks = count("blocks");
    m.backend.channels = count("channels");
    m.backend.K = count("K");
    m.backend.pool_factor = count("pool");
    m.backend.validate();
    m.theta_hidden = count("theta_hidden");
    m.theta_out = count("K_in");
    m.phi_blocks = count("phi_blocks");
    m.fusion_dim = count("d_in");
    m.d = count("d");
    m.mel_offset = real("mel_offset");
    m.mel_scale = real("mel_scale");
    return m;
  }

  fusion::TrainConfig train_config() const {
    fusion::TrainConfig t;
    t.epochs = count("epochs");
    t.batch = count("batch");
    t.lr = real("lr");
    t.seed = seed();
    t.validate();
    return t;
  }

  synth::RandomSceneOptions scene_options() const {
    synth::RandomSceneOptions o;
    o.duration_s = real("duration");
    o.sample_rate = real("sample_rate");
    o.noise_level = real("noise_level");
    o.lane_distance = real("lane_distance");
    o.max_events_per_category = static_cast<int>(count("max_events"));
    return o;
  }

 private:
  static std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  }

  static void check_value(const KeySpec &spec, const std::string &v) {
    auto fail = [&](const char *what) {
      throw ConfigError(std::string(spec.key) + ": '" + v + "' is not " + what);
    };
    std::size_t used = 0;
    switch (spec.kind) {
      case ValueKind::count:
      case ValueKind::positive_count:
      case ValueKind::seed: {
        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
          fail("a non-negative integer");
        unsigned long long n = 0;
        try {
          n = std::stoull(v, &used);
        } catch (const std::exception &) {
          fail("a representable integer");
        }
        if (spec.kind == ValueKind::positive_count && n == 0) fail("a positive integer");
        break;
      }
      case ValueKind::real:
      case ValueKind::positive_real: {
        double x = 0.0;
        try {
          x = std::stod(v, &used);
        } catch (const std::exception &) {
          fail("a number");
        }
        if (used != v.size() || !std::isfinite(x)) fail("a finite number");
        if (spec.kind == ValueKind::positive_real && !(x > 0.0)) fail("a positive number");
        break;
      }
      case ValueKind::text:
        break;
    }
  }

  std::map<std::string, std::string> values_;
};

}  // namespace gedf::cli
