// SPDX-License-Identifier: Apache-2.0
/**
 * @file   checkpoint.hpp
 * @brief  Binary parameter container.
 *
 * Layout (all integers little-endian):
 *
 *   "GEDFCKPT"          8 bytes magic
 *   u32 version         currently 1
 *   u32 record_count
 *   record_count x {
 *     u32 name_length, name bytes (UTF-8, no terminator)
 *     u32 rank, rank x u64 dims
 *     prod(dims) x f64 values (IEEE-754 binary64)
 *   }
 *
 * Reading a file and writing it back reproduces it byte for byte.
 */
#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unordered_map>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/parameter_store.hpp"

namespace gedf::nn {

inline constexpr char kCheckpointMagic[8] = {'G', 'E', 'D', 'F',
                                             'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;
};

namespace detail {

template <class T>
void put_le(std::vector<std::uint8_t> &out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

class ByteReader {
 public:
  ByteReader(const std::vector<std::uint8_t> &bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size())
      throw CheckpointError(source_ + ": truncated at byte " +
                            std::to_string(pos_));
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }

  std::string get_string(std::size_t n) {
    if (pos_ + n > bytes_.size())
      throw CheckpointError(source_ + ": truncated string at byte " +
                            std::to_string(pos_));
    std::string s(reinterpret_cast<const char *>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t> &bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<std::uint8_t> encode_checkpoint(
    const std::vector<CheckpointRecord> &records) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic),
                                std::end(kCheckpointMagic));
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const auto &r : records) {
    if (shape_size(r.shape) != r.values.size())
      throw CheckpointError("record '" + r.name + "' has shape " +
                            shape_str(r.shape) + " but " +
                            std::to_string(r.values.size()) + " values");
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.shape.size()));
    for (auto d : r.shape) detail::put_le<std::uint64_t>(out, d);
    for (double v : r.values) detail::put_le<double>(out, v);
  }
  return out;
}

inline std::vector<CheckpointRecord> decode_checkpoint(
    const std::vector<std::uint8_t> &bytes, const std::string &source = "checkpoint") {
  if (bytes.size() < 16 ||
      std::memcmp(bytes.data(), kCheckpointMagic, sizeof(kCheckpointMagic)) != 0)
    throw CheckpointError(source + ": not a gedf checkpoint (bad magic)");
  detail::ByteReader rd(bytes, source);
  rd.get_string(8);
  const auto version = rd.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw CheckpointError(source + ": unsupported format version " +
                          std::to_string(version));
  const auto count = rd.get<std::uint32_t>();
  std::vector<CheckpointRecord> records;
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointRecord r;
    r.name = rd.get_string(rd.get<std::uint32_t>());
    const auto rank = rd.get<std::uint32_t>();
    if (rank > 8) throw CheckpointError(source + ": implausible rank for '" + r.name + "'");
    for (std::uint32_t i = 0; i < rank; ++i)
      r.shape.push_back(static_cast<std::size_t>(rd.get<std::uint64_t>()));
    const std::size_t n = shape_size(r.shape);
    if (n > rd.remaining() / sizeof(double))
      throw CheckpointError(source + ": truncated values for '" + r.name + "'");
    r.values.resize(n);
    for (auto &v : r.values) v = rd.get<double>();
    records.push_back(std::move(r));
  }
  if (!rd.done())
    throw CheckpointError(source + ": trailing bytes after last record");
  return records;
}

inline std::vector<CheckpointRecord> records_from_store(const ParameterStore &store) {
  std::vector<CheckpointRecord> records;
  for (const auto &p : store.params())
    records.push_back({p.name, p.value.shape, p.value.data});
  return records;
}

inline void write_bytes(const std::filesystem::path &path,
                        const std::vector<std::uint8_t> &bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char *>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

inline void save_checkpoint(const ParameterStore &store,
                            const std::filesystem::path &path) {
  write_bytes(path, encode_checkpoint(records_from_store(store)));
}

/// Copies records into `store`. Every store parameter must be present with
/// its exact shape; all offending entries are listed in one error.
inline void apply_records(ParameterStore &store,
                          const std::vector<CheckpointRecord> &records,
                          const std::string &source = "checkpoint") {
  std::string problems;
  std::unordered_map<std::string, const CheckpointRecord *> by_name;
  for (const auto &r : records) by_name[r.name] = &r;
  for (const auto &p : store.params()) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      problems += "\n  missing '" + p.name + "' " + shape_str(p.value.shape);
    } else if (it->second->shape != p.value.shape) {
      problems += "\n  '" + p.name + "' expected " + shape_str(p.value.shape) +
                  ", found " + shape_str(it->second->shape);
    }
  }
  for (const auto &r : records)
    if (!store.contains(r.name))
      problems += "\n  unexpected '" + r.name + "' " + shape_str(r.shape);
  if (!problems.empty())
    throw CheckpointError(source + " does not match the configured architecture:" +
                          problems);
  for (auto &p : store.params()) p.value.data = by_name[p.name]->values;
}

inline void load_checkpoint(ParameterStore &store,
                            const std::filesystem::path &path) {
  apply_records(store, decode_checkpoint(read_bytes(path), path.string()),
                path.string());
}

}  // namespace gedf::nn
