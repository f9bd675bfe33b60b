// SPDX-License-Identifier: Apache-2.0
/**
 * @file   dataset.hpp
 * @brief  On-disk datasets: one 4-channel WAV per scene plus a CSV manifest.
 *
 * Manifest header: filename,car_left,car_right,cv_left,cv_right[,location]
 * Filenames are relative to the manifest's directory. The location column
 * is optional on input and always written by DatasetWriter.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/synth/scene.hpp"
#include "gedf/synth/wav.hpp"

namespace gedf::synth {

inline constexpr const char *kCountColumns[4] = {"car_left", "car_right", "cv_left",
                                                 "cv_right"};

struct ManifestRow {
  std::string filename;
  SceneLabel label;
  std::string location;  // empty when the manifest has no location column
};

struct SceneRecord {
  std::string filename;  // generated when empty
  MultiChannelAudio audio;
  SceneLabel label;
  std::string location;
};

/// Streams scenes to disk so large datasets never sit in memory at once.
class DatasetWriter {
 public:
  explicit DatasetWriter(std::filesystem::path out_dir,
                         SampleFormat format = SampleFormat::float32)
      : dir_(std::move(out_dir)), format_(format) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create '" + dir_.string() + "': " + ec.message());
    manifest_ = dir_ / "manifest.csv";
    os_.open(manifest_, std::ios::binary);
    if (!os_) throw IoError("cannot open '" + manifest_.string() + "' for writing");
    os_ << "filename,car_left,car_right,cv_left,cv_right,location\n";
  }

  void add(const SceneRecord &scene) {
    std::string name = scene.filename;
    if (name.empty()) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "scene_%05zu.wav", count_);
      name = buf;
    }
    write_wav(dir_ / name, scene.audio, format_);
    os_ << name;
    for (int c : scene.label.counts) os_ << ',' << c;
    os_ << ',' << scene.location << '\n';
    if (!os_) throw IoError("write failed for '" + manifest_.string() + "'");
    ++count_;
  }

  std::filesystem::path finish() {
    os_.close();
    if (!os_) throw IoError("close failed for '" + manifest_.string() + "'");
    return manifest_;
  }

  std::size_t count() const { return count_; }

 private:
  std::filesystem::path dir_, manifest_;
  SampleFormat format_;
  std::ofstream os_;
  std::size_t count_ = 0;
};

inline std::filesystem::path write_dataset(const std::vector<SceneRecord> &scenes,
                                           const std::filesystem::path &out_dir,
                                           SampleFormat format = SampleFormat::float32) {
  DatasetWriter writer(out_dir, format);
  for (const auto &s : scenes) writer.add(s);
  return writer.finish();
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(field.begin());
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
}  // namespace detail

inline std::vector<ManifestRow> read_manifest(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open manifest '" + path.string() + "'");
  std::string line;
  if (!std::getline(is, line)) throw IoError("manifest '" + path.string() + "' is empty");
  const auto header = detail::split_csv(line);
  auto column = [&](const std::string &name) -> long {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<long>(i);
    return -1;
  };
  const long file_col = column("filename");
  if (file_col < 0) throw IoError(path.string() + ": header lacks 'filename'");
  long count_cols[4];
  for (int c = 0; c < 4; ++c) {
    count_cols[c] = column(kCountColumns[c]);
    if (count_cols[c] < 0)
      throw IoError(path.string() + ": header lacks '" + kCountColumns[c] + "'");
  }
  const long loc_col = column("location");

  std::vector<ManifestRow> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = detail::split_csv(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (f.size() < header.size())
      throw IoError(where + ": expected " + std::to_string(header.size()) + " fields");
    ManifestRow row;
    row.filename = f[static_cast<std::size_t>(file_col)];
    for (int c = 0; c < 4; ++c) {
      const auto &s = f[static_cast<std::size_t>(count_cols[c])];
      try {
        std::size_t used = 0;
        row.label.counts[c] = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception &) {
        throw IoError(where + ": bad count '" + s + "' in column " + kCountColumns[c]);
      }
      if (row.label.counts[c] < 0)
        throw IoError(where + ": negative count in column " + kCountColumns[c]);
    }
    if (loc_col >= 0) row.location = f[static_cast<std::size_t>(loc_col)];
    rows.push_back(std::move(row));
  }
  return rows;
}

inline MultiChannelAudio load_scene_audio(const std::filesystem::path &manifest,
                                          const ManifestRow &row) {
  return read_wav(manifest.parent_path() / row.filename);
}

}  // namespace gedf::synth
