// SPDX-License-Identifier: Apache-2.0
/**
 * @file   wav.hpp
 * @brief  RIFF/WAVE reader and writer for multichannel audio.
 *
 * Writes WAVE_FORMAT_EXTENSIBLE with either 16-bit PCM or 32-bit IEEE float
 * samples. Reads plain PCM16 / float32 as well as the extensible variants.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "gedf/audio.hpp"
#include "gedf/error.hpp"

namespace gedf::synth {

enum class SampleFormat { pcm16, float32 };

namespace detail {

inline void put_u16(std::vector<std::uint8_t> &b, std::uint16_t v) {
  b.push_back(static_cast<std::uint8_t>(v & 0xff));
  b.push_back(static_cast<std::uint8_t>(v >> 8));
}
inline void put_u32(std::vector<std::uint8_t> &b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline void put_tag(std::vector<std::uint8_t> &b, const char *tag) {
  b.insert(b.end(), tag, tag + 4);
}
inline std::uint16_t get_u16(const std::uint8_t *p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline std::uint32_t get_u32(const std::uint8_t *p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline constexpr std::uint16_t kFormatPcm = 1;
inline constexpr std::uint16_t kFormatFloat = 3;
inline constexpr std::uint16_t kFormatExtensible = 0xFFFE;
// KSDATAFORMAT_SUBTYPE_* GUID tail shared by PCM and IEEE float.
inline constexpr std::array<std::uint8_t, 14> kGuidTail = {
    0x00, 0x00, 0x00, 0x00, 0x10, 0x00, 0x80, 0x00, 0x00, 0xAA, 0x00, 0x38, 0x9B, 0x71};

}  // namespace detail

inline std::vector<std::uint8_t> encode_wav(const MultiChannelAudio &audio,
                                            SampleFormat format) {
  using namespace detail;
  const std::uint16_t channels = static_cast<std::uint16_t>(kNumChannels);
  const std::uint16_t bits = format == SampleFormat::pcm16 ? 16 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
  const std::size_t frames = audio.length();
  const auto data_bytes = static_cast<std::uint32_t>(frames * block);

  std::vector<std::uint8_t> b;
  b.reserve(68 + data_bytes);
  put_tag(b, "RIFF");
  put_u32(b, 4 + (8 + 40) + (8 + data_bytes));
  put_tag(b, "WAVE");
  put_tag(b, "fmt ");
  put_u32(b, 40);
  put_u16(b, kFormatExtensible);
  put_u16(b, channels);
  put_u32(b, rate);
  put_u32(b, rate * block);
  put_u16(b, block);
  put_u16(b, bits);
  put_u16(b, 22);    // extension size
  put_u16(b, bits);  // valid bits per sample
  put_u32(b, 0x33);  // FL | FR | BL | BR
  put_u16(b, format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
  b.insert(b.end(), kGuidTail.begin(), kGuidTail.end());
  put_tag(b, "data");
  put_u32(b, data_bytes);
  for (std::size_t n = 0; n < frames; ++n)
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const double v = std::clamp(audio.channels[c][n], -1.0, 1.0);
      if (format == SampleFormat::pcm16) {
        const auto s = static_cast<std::int16_t>(std::lround(v * 32767.0));
        put_u16(b, static_cast<std::uint16_t>(s));
      } else {
        const float f = static_cast<float>(v);
        std::uint32_t bitsv;
        std::memcpy(&bitsv, &f, 4);
        put_u32(b, bitsv);
      }
    }
  return b;
}

inline MultiChannelAudio decode_wav(const std::vector<std::uint8_t> &bytes,
                                    const std::string &source = "wav") {
  using namespace detail;
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IoError(source + ": not a RIFF/WAVE file");
  std::size_t pos = 12;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t *data = nullptr;
  std::uint32_t data_size = 0;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    if (pos + 8 + size > bytes.size())
      throw IoError(source + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw IoError(source + ": short fmt chunk");
      format = get_u16(chunk + 8);
      channels = get_u16(chunk + 10);
      rate = get_u32(chunk + 12);
      bits = get_u16(chunk + 22);
      if (format == kFormatExtensible) {
        if (size < 40) throw IoError(source + ": short extensible fmt chunk");
        format = get_u16(chunk + 32);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (!data || channels == 0) throw IoError(source + ": missing fmt or data chunk");
  if (channels != kNumChannels)
    throw IoError(source + ": expected 4 channels, found " + std::to_string(channels));
  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  if (!pcm16 && !f32)
    throw IoError(source + ": unsupported sample format (" + std::to_string(format) +
                  ", " + std::to_string(bits) + " bits)");
  const std::size_t block = channels * bits / 8u;
  const std::size_t frames = data_size / block;
  MultiChannelAudio audio(frames, static_cast<double>(rate));
  for (std::size_t n = 0; n < frames; ++n)
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const std::uint8_t *p = data + n * block + c * (bits / 8u);
      if (pcm16) {
        audio.channels[c][n] = static_cast<std::int16_t>(get_u16(p)) / 32767.0;
      } else {
        const std::uint32_t u = get_u32(p);
        float f;
        std::memcpy(&f, &u, 4);
        audio.channels[c][n] = f;
      }
    }
  return audio;
}

inline void write_wav(const std::filesystem::path &path, const MultiChannelAudio &audio,
                      SampleFormat format = SampleFormat::float32) {
  const auto bytes = encode_wav(audio, format);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os.write(reinterpret_cast<const char *>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline MultiChannelAudio read_wav(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(is),
                                  std::istreambuf_iterator<char>()};
  auto audio = decode_wav(bytes, path.string());
  // PCM16 -32768 decodes just below -1.
  for (auto &ch : audio.channels)
    for (auto &v : ch) v = std::clamp(v, -1.0, 1.0);
  return audio;
}

}  // namespace gedf::synth
