// SPDX-License-Identifier: Apache-2.0
/**
 * @file   heatmap.hpp
 * @brief  Bilinear upsampling of an attention graph to a grayscale PGM, with
 *         a text sidecar holding the raw coefficients.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/tensor.hpp"

namespace gedf::eval {

struct Heatmap {
  std::size_t size = 0;           // width == height == N * factor
  std::vector<double> field;      // interpolated values, row-major
  std::vector<std::uint8_t> pixels;
};

/// Half-pixel-centred bilinear resampling of an N x N matrix by `factor`.
inline std::vector<double> bilinear_upsample(const nn::Tensor &A, std::size_t factor) {
  if (A.rank() != 2 || A.dim(0) != A.dim(1) || A.dim(0) == 0)
    throw ShapeError("heatmap needs a non-empty square matrix, got " + nn::shape_str(A.shape));
  if (factor == 0) throw ConfigError("upsample factor must be at least 1");
  const std::size_t N = A.dim(0), S = N * factor;
  auto coord = [&](std::size_t u, std::size_t &i0, std::size_t &i1, double &t) {
    double x = (static_cast<double>(u) + 0.5) / static_cast<double>(factor) - 0.5;
    x = std::clamp(x, 0.0, static_cast<double>(N - 1));
    i0 = static_cast<std::size_t>(x);
    i1 = std::min(i0 + 1, N - 1);
    t = x - static_cast<double>(i0);
  };
  std::vector<double> out(S * S);
  for (std::size_t r = 0; r < S; ++r) {
    std::size_t r0, r1;
    double tr;
    coord(r, r0, r1, tr);
    for (std::size_t c = 0; c < S; ++c) {
      std::size_t c0, c1;
      double tc;
      coord(c, c0, c1, tc);
      const double top = A.at(r0, c0) + tc * (A.at(r0, c1) - A.at(r0, c0));
      const double bot = A.at(r1, c0) + tc * (A.at(r1, c1) - A.at(r1, c0));
      out[r * S + c] = top + tr * (bot - top);
    }
  }
  return out;
}

/// Min-max normalization to 0..255. A field whose range is below 1e-12 maps
/// to a constant mid-gray image.
inline Heatmap render_heatmap(const nn::Tensor &A, std::size_t factor) {
  Heatmap h;
  h.field = bilinear_upsample(A, factor);
  h.size = A.dim(0) * factor;
  const auto [lo, hi] = std::minmax_element(h.field.begin(), h.field.end());
  const double range = *hi - *lo;
  h.pixels.resize(h.field.size());
  for (std::size_t i = 0; i < h.field.size(); ++i) {
    const double v = range < 1e-12 ? 0.5 : (h.field[i] - *lo) / range;
    h.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return h;
}

inline std::string encode_pgm(const Heatmap &h) {
  std::string out = "P5\n" + std::to_string(h.size) + " " + std::to_string(h.size) + "\n255\n";
  out.append(h.pixels.begin(), h.pixels.end());
  return out;
}

/// Returns (size, pixels) from a binary PGM written by encode_pgm.
inline Heatmap decode_pgm(const std::string &bytes, const std::string &source = "image") {
  std::istringstream is(bytes);
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  if (!is || magic != "P5" || maxval != 255 || w != h)
    throw IoError(source + ": not a square 8-bit binary PGM");
  is.get();
  Heatmap out;
  out.size = w;
  out.pixels.resize(w * h);
  is.read(reinterpret_cast<char *>(out.pixels.data()), static_cast<std::streamsize>(w * h));
  if (is.gcount() != static_cast<std::streamsize>(w * h)) throw IoError(source + ": truncated");
  return out;
}

/// One row per line, space separated, full precision.
inline std::string format_matrix(const nn::Tensor &A) {
  std::string out;
  char buf[40];
  for (std::size_t i = 0; i < A.dim(0); ++i) {
    for (std::size_t j = 0; j < A.dim(1); ++j) {
      std::snprintf(buf, sizeof(buf), j ? " %.17g" : "%.17g", A.at(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline nn::Tensor parse_matrix(const std::string &text, const std::string &source = "sidecar") {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw IoError(source + ": bad value in row " + std::to_string(rows.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(source + ": empty matrix");
  nn::Tensor A({rows.size(), rows[0].size()});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw IoError(source + ": ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) A.at(i, j) = rows[i][j];
  }
  return A;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path &image) {
  auto p = image;
  p += ".txt";
  return p;
}

/// Writes `path` (PGM) and `path.txt` (raw A). Returns the rendered heatmap.
inline Heatmap export_adjacency_heatmap(const nn::Tensor &A, std::size_t factor,
                                        const std::filesystem::path &path) {
  auto h = render_heatmap(A, factor);
  auto put = [](const std::filesystem::path &p, const std::string &data) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    os << data;
    if (!os) throw IoError("failed writing '" + p.string() + "'");
  };
  put(path, encode_pgm(h));
  put(sidecar_path(path), format_matrix(A));
  return h;
}

}  // namespace gedf::eval
