// SPDX-License-Identifier: Apache-2.0
/**
 * @file   tensor.hpp
 * @brief  Dense row-major double tensor used throughout the network code.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gedf/error.hpp"

namespace gedf::nn {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape &shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

inline std::string shape_str(const Shape &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0)
      : shape(std::move(s)), data(shape_size(shape), fill) {}
  Tensor(Shape s, std::vector<double> values)
      : shape(std::move(s)), data(std::move(values)) {
    if (data.size() != shape_size(shape))
      throw ShapeError("tensor of shape " + shape_str(shape) + " given " +
                       std::to_string(data.size()) + " values");
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t axis) const { return shape.at(axis); }

  double &operator[](std::size_t i) { return data[i]; }
  const double &operator[](std::size_t i) const { return data[i]; }

  double &at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  const double &at(std::size_t i, std::size_t j) const {
    return data[i * shape[1] + j];
  }
  double &at(std::size_t c, std::size_t i, std::size_t j) {
    return data[(c * shape[1] + i) * shape[2] + j];
  }
  const double &at(std::size_t c, std::size_t i, std::size_t j) const {
    return data[(c * shape[1] + i) * shape[2] + j];
  }

  Tensor reshaped(Shape s) const {
    if (shape_size(s) != size())
      throw ShapeError("cannot reshape " + shape_str(shape) + " to " +
                       shape_str(s));
    return Tensor(std::move(s), data);
  }

  bool all_finite() const {
    return std::all_of(data.begin(), data.end(),
                       [](double v) { return std::isfinite(v); });
  }
};

inline void require_shape(const Tensor &t, const Shape &expected,
                          const std::string &what) {
  if (t.shape != expected)
    throw ShapeError(what + ": expected " + shape_str(expected) + ", got " +
                     shape_str(t.shape));
}

/// 2-D transpose.
inline Tensor transpose(const Tensor &t) {
  if (t.rank() != 2) throw ShapeError("transpose needs a rank-2 tensor");
  const std::size_t r = t.dim(0), c = t.dim(1);
  Tensor out({c, r});
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out.at(j, i) = t.at(i, j);
  return out;
}

inline void add_inplace(Tensor &dst, const Tensor &src) {
  if (dst.shape != src.shape)
    throw ShapeError("add: " + shape_str(dst.shape) + " vs " +
                     shape_str(src.shape));
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

inline double max_abs_diff(const Tensor &a, const Tensor &b) {
  if (a.shape != b.shape)
    throw ShapeError("compare: " + shape_str(a.shape) + " vs " +
                     shape_str(b.shape));
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

}  // namespace gedf::nn
