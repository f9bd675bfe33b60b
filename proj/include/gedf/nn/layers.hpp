// SPDX-License-Identifier: Apache-2.0
/**
 * @file   layers.hpp
 * @brief  Trainable layers with explicit forward tapes and reverse-mode
 *         backward passes.
 *
 * Tensor layouts:
 *   linear            [in] or [M, in]        -> [out] or [M, out]
 *   conv2d            [Cin, H, W]            -> [Cout, H, W]   (same padding)
 *   leaky_relu, relu  any                    -> same
 *   softmax_rows      [R, C]                 -> [R, C]
 *   gru               [T, in]                -> [T, hidden]    (h_0 = 0)
 *   adaptive_avg_pool [C, W] or [C, H, W]    -> [C, out_w] or [C, out_h, out_w]
 *
 * GRU gate order inside the stacked weights is (reset, update, candidate):
 *   r  = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
 *   z  = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
 *   n  = tanh(W_in x + b_in + r * (W_hn h + b_hn))
 *   h' = (1 - z) * n + z * h
 */
#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "gedf/error.hpp"
#include "gedf/nn/activation_probe.hpp"
#include "gedf/nn/parameter_store.hpp"
#include "gedf/nn/tensor.hpp"

namespace gedf::nn {

enum class LayerKind {
  linear,
  conv2d,
  leaky_relu,
  relu,
  softmax_rows,
  gru,
  adaptive_avg_pool,
};

inline const char *layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::linear: return "linear";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::relu: return "relu";
    case LayerKind::softmax_rows: return "softmax_rows";
    case LayerKind::gru: return "gru";
    case LayerKind::adaptive_avg_pool: return "adaptive_avg_pool";
  }
  return "?";
}

inline constexpr double kLeakySlope = 0.2;

struct LayerSpec {
  LayerKind kind = LayerKind::linear;
  std::string name;  // parameter prefix for trainable kinds
  std::size_t in = 0;   // linear in-features, conv in-channels, gru input size
  std::size_t out = 0;  // linear out-features, conv out-channels, gru hidden
  std::size_t kernel_h = 1;
  std::size_t kernel_w = 1;
  bool bias = true;
  double slope = kLeakySlope;
  std::size_t out_h = 0;  // pooling targets; 0 keeps the axis unchanged
  std::size_t out_w = 0;

  static LayerSpec linear(std::string name, std::size_t in, std::size_t out,
                          bool bias = true) {
    LayerSpec s;
    s.kind = LayerKind::linear;
    s.name = std::move(name);
    s.in = in;
    s.out = out;
    s.bias = bias;
    return s;
  }
  static LayerSpec conv2d(std::string name, std::size_t in_channels,
                          std::size_t out_channels, std::size_t kernel_h,
                          std::size_t kernel_w) {
    LayerSpec s;
    s.kind = LayerKind::conv2d;
    s.name = std::move(name);
    s.in = in_channels;
    s.out = out_channels;
    s.kernel_h = kernel_h;
    s.kernel_w = kernel_w;
    return s;
  }
  static LayerSpec leaky_relu(double slope = kLeakySlope) {
    LayerSpec s;
    s.kind = LayerKind::leaky_relu;
    s.slope = slope;
    return s;
  }
  static LayerSpec relu() {
    LayerSpec s;
    s.kind = LayerKind::relu;
    return s;
  }
  static LayerSpec softmax_rows() {
    LayerSpec s;
    s.kind = LayerKind::softmax_rows;
    return s;
  }
  static LayerSpec gru(std::string name, std::size_t input, std::size_t hidden) {
    LayerSpec s;
    s.kind = LayerKind::gru;
    s.name = std::move(name);
    s.in = input;
    s.out = hidden;
    return s;
  }
  static LayerSpec adaptive_avg_pool(std::size_t out_h, std::size_t out_w) {
    LayerSpec s;
    s.kind = LayerKind::adaptive_avg_pool;
    s.out_h = out_h;
    s.out_w = out_w;
    return s;
  }
};

/// Saved activations from one forward call.
struct Tape {
  LayerKind kind = LayerKind::linear;
  Shape input_shape;
  Shape output_shape;
  std::vector<Tensor> saved;
};

namespace detail {

inline std::string pname(const LayerSpec &l, const char *suffix) {
  return l.name + "." + suffix;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Start of adaptive pooling cell n when mapping `len` inputs to `cells`.
inline std::size_t pool_start(std::size_t n, std::size_t len,
                              std::size_t cells) {
  return n * len / cells;
}

struct PoolGeometry {
  std::size_t channels, in_h, in_w, out_h, out_w;
};

inline PoolGeometry pool_geometry(const LayerSpec &l, const Shape &in) {
  PoolGeometry g{};
  if (in.size() == 2) {
    g = {in[0], 1, in[1], 1, l.out_w ? l.out_w : in[1]};
    if (l.out_h > 1)
      throw ShapeError("pooling a rank-2 input to height " +
                       std::to_string(l.out_h));
  } else if (in.size() == 3) {
    g = {in[0], in[1], in[2], l.out_h ? l.out_h : in[1],
         l.out_w ? l.out_w : in[2]};
  } else {
    throw ShapeError("adaptive_avg_pool expects [C,W] or [C,H,W], got " +
                     shape_str(in));
  }
  if (g.out_h > g.in_h || g.out_w > g.in_w)
    throw PoolingError("cannot pool " + shape_str(in) + " up to " +
                       std::to_string(g.out_h) + "x" + std::to_string(g.out_w) +
                       " (upsampling is out of contract)");
  if (g.out_h == 0 || g.out_w == 0)
    throw PoolingError("pooling target must be at least 1");
  return g;
}

}  // namespace detail

/// Registers the layer's parameters in `store` (no-op for stateless kinds).
/// Weights: fan-in scaled uniform. Biases: zero.
inline void register_params(const LayerSpec &l, ParameterStore &store,
                            std::mt19937_64 &rng) {
  using detail::pname;
  switch (l.kind) {
    case LayerKind::linear: {
      auto &w = store.add(pname(l, "weight"), {l.out, l.in});
      init_uniform_fan_in(w.value, l.in, rng);
      if (l.bias) store.add(pname(l, "bias"), {l.out});
      break;
    }
    case LayerKind::conv2d: {
      if (l.kernel_h % 2 == 0 || l.kernel_w % 2 == 0)
        throw ConfigError("conv2d '" + l.name + "' needs odd kernel sizes");
      auto &w = store.add(pname(l, "weight"),
                          {l.out, l.in, l.kernel_h, l.kernel_w});
      init_uniform_fan_in(w.value, l.in * l.kernel_h * l.kernel_w, rng);
      if (l.bias) store.add(pname(l, "bias"), {l.out});
      break;
    }
    case LayerKind::gru: {
      auto &wi = store.add(pname(l, "w_ih"), {3 * l.out, l.in});
      init_uniform_fan_in(wi.value, l.in, rng);
      auto &wh = store.add(pname(l, "w_hh"), {3 * l.out, l.out});
      init_uniform_fan_in(wh.value, l.out, rng);
      store.add(pname(l, "b_ih"), {3 * l.out});
      store.add(pname(l, "b_hh"), {3 * l.out});
      break;
    }
    default:
      break;
  }
}

inline Tensor forward(const LayerSpec &l, const ParameterStore &store,
                      const Tensor &x, Tape *tape) {
  using detail::pname;
  Tensor y;
  std::vector<Tensor> saved;
  switch (l.kind) {
    case LayerKind::linear: {
      const Tensor &w = store.value(pname(l, "weight"));
      require_shape(w, {l.out, l.in}, l.name + ".weight");
      std::size_t rows = 0;
      if (x.rank() == 1 && x.dim(0) == l.in) {
        rows = 1;
        y = Tensor({l.out});
      } else if (x.rank() == 2 && x.dim(1) == l.in) {
        rows = x.dim(0);
        y = Tensor({rows, l.out});
      } else {
        throw ShapeError("linear '" + l.name + "' expects [.., " +
                         std::to_string(l.in) + "], got " + shape_str(x.shape));
      }
      const double *b = l.bias ? store.value(pname(l, "bias")).data.data() : nullptr;
      for (std::size_t m = 0; m < rows; ++m) {
        const double *xr = x.data.data() + m * l.in;
        double *yr = y.data.data() + m * l.out;
        for (std::size_t o = 0; o < l.out; ++o) {
          const double *wr = w.data.data() + o * l.in;
          double acc = b ? b[o] : 0.0;
          for (std::size_t i = 0; i < l.in; ++i) acc += wr[i] * xr[i];
          yr[o] = acc;
        }
      }
      saved.push_back(x);
      break;
    }
    case LayerKind::conv2d: {
      if (x.rank() != 3 || x.dim(0) != l.in)
        throw ShapeError("conv2d '" + l.name + "' expects [" +
                         std::to_string(l.in) + ",H,W], got " +
                         shape_str(x.shape));
      const std::size_t H = x.dim(1), W = x.dim(2);
      const std::size_t kh = l.kernel_h, kw = l.kernel_w;
      const long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
      const Tensor &w = store.value(pname(l, "weight"));
      require_shape(w, {l.out, l.in, kh, kw}, l.name + ".weight");
      y = Tensor({l.out, H, W});
      if (l.bias) {
        const Tensor &b = store.value(pname(l, "bias"));
        for (std::size_t co = 0; co < l.out; ++co)
          std::fill_n(y.data.begin() + static_cast<long>(co * H * W), H * W,
                      b[co]);
      }
      for (std::size_t co = 0; co < l.out; ++co)
        for (std::size_t ci = 0; ci < l.in; ++ci)
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const double wv = w.data[((co * l.in + ci) * kh + ky) * kw + kx];
              const long dy = static_cast<long>(ky) - ph;
              const long dx = static_cast<long>(kx) - pw;
              const std::size_t x0 = dx < 0 ? static_cast<std::size_t>(-dx) : 0;
              const std::size_t x1 = dx > 0 ? W - static_cast<std::size_t>(dx) : W;
              for (std::size_t oy = 0; oy < H; ++oy) {
                const long iy = static_cast<long>(oy) + dy;
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                double *yr = &y.at(co, oy, 0);
                const double *xr = &x.at(ci, static_cast<std::size_t>(iy), 0);
                for (std::size_t ox = x0; ox < x1; ++ox)
                  yr[ox] += wv * xr[static_cast<long>(ox) + dx];
              }
            }
      saved.push_back(x);
      break;
    }
    case LayerKind::leaky_relu:
    case LayerKind::relu: {
      const double slope = l.kind == LayerKind::relu ? 0.0 : l.slope;
      y = x;
      for (auto &v : y.data)
        if (!(v > 0.0)) v *= slope;
      if (auto &probe = activation_probe(); probe.armed)
        for (double v : x.data) probe.record(v > 0.0);
      saved.push_back(x);
      break;
    }
    case LayerKind::softmax_rows: {
      if (x.rank() != 2)
        throw ShapeError("softmax_rows expects [R,C], got " + shape_str(x.shape));
      const std::size_t R = x.dim(0), C = x.dim(1);
      y = Tensor(x.shape);
      for (std::size_t r = 0; r < R; ++r) {
        double mx = x.at(r, 0);
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, x.at(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < C; ++c) {
          y.at(r, c) = std::exp(x.at(r, c) - mx);
          sum += y.at(r, c);
        }
        for (std::size_t c = 0; c < C; ++c) y.at(r, c) /= sum;
      }
      saved.push_back(y);
      break;
    }
    case LayerKind::gru: {
      if (x.rank() != 2 || x.dim(1) != l.in)
        throw ShapeError("gru '" + l.name + "' expects [T," +
                         std::to_string(l.in) + "], got " + shape_str(x.shape));
      const std::size_t T = x.dim(0), Hd = l.out, I = l.in;
      const Tensor &wi = store.value(pname(l, "w_ih"));
      const Tensor &wh = store.value(pname(l, "w_hh"));
      const Tensor &bi = store.value(pname(l, "b_ih"));
      const Tensor &bh = store.value(pname(l, "b_hh"));
      require_shape(wi, {3 * Hd, I}, l.name + ".w_ih");
      require_shape(wh, {3 * Hd, Hd}, l.name + ".w_hh");
      Tensor hs({T + 1, Hd});
      Tensor r({T, Hd}), z({T, Hd}), n({T, Hd}), ghn({T, Hd});
      std::vector<double> gi(3 * Hd), gh(3 * Hd);
      for (std::size_t t = 0; t < T; ++t) {
        const double *xt = &x.at(t, 0);
        const double *hp = &hs.at(t, 0);
        for (std::size_t g = 0; g < 3 * Hd; ++g) {
          double a = bi[g], b = bh[g];
          const double *wir = &wi.data[g * I];
          const double *whr = &wh.data[g * Hd];
          for (std::size_t i = 0; i < I; ++i) a += wir[i] * xt[i];
          for (std::size_t j = 0; j < Hd; ++j) b += whr[j] * hp[j];
          gi[g] = a;
          gh[g] = b;
        }
        for (std::size_t j = 0; j < Hd; ++j) {
          const double rj = detail::sigmoid(gi[j] + gh[j]);
          const double zj = detail::sigmoid(gi[Hd + j] + gh[Hd + j]);
          const double nj = std::tanh(gi[2 * Hd + j] + rj * gh[2 * Hd + j]);
          r.at(t, j) = rj;
          z.at(t, j) = zj;
          n.at(t, j) = nj;
          ghn.at(t, j) = gh[2 * Hd + j];
          hs.at(t + 1, j) = (1.0 - zj) * nj + zj * hp[j];
        }
      }
      y = Tensor({T, Hd});
      std::copy(hs.data.begin() + static_cast<long>(Hd), hs.data.end(),
                y.data.begin());
      saved = {x, hs, r, z, n, ghn};
      break;
    }
    case LayerKind::adaptive_avg_pool: {
      const auto g = detail::pool_geometry(l, x.shape);
      y = x.rank() == 2 ? Tensor({g.channels, g.out_w})
                        : Tensor({g.channels, g.out_h, g.out_w});
      for (std::size_t c = 0; c < g.channels; ++c)
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const std::size_t h0 = detail::pool_start(oh, g.in_h, g.out_h);
          const std::size_t h1 = detail::pool_start(oh + 1, g.in_h, g.out_h);
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::size_t w0 = detail::pool_start(ow, g.in_w, g.out_w);
            const std::size_t w1 = detail::pool_start(ow + 1, g.in_w, g.out_w);
            double acc = 0.0;
            for (std::size_t h = h0; h < h1; ++h)
              for (std::size_t w = w0; w < w1; ++w)
                acc += x.data[(c * g.in_h + h) * g.in_w + w];
            y.data[(c * g.out_h + oh) * g.out_w + ow] =
                acc / static_cast<double>((h1 - h0) * (w1 - w0));
          }
        }
      break;
    }
  }
  if (tape) {
    tape->kind = l.kind;
    tape->input_shape = x.shape;
    tape->output_shape = y.shape;
    tape->saved = std::move(saved);
  }
  return y;
}

/// Accumulates parameter gradients into `store` and returns the gradient
/// with respect to the layer input.
inline Tensor backward(const LayerSpec &l, ParameterStore &store,
                       const Tape &tape, const Tensor &up) {
  using detail::pname;
  if (tape.kind != l.kind)
    throw ContractError(std::string("tape recorded by ") +
                        layer_kind_name(tape.kind) + " replayed through " +
                        layer_kind_name(l.kind));
  if (up.shape != tape.output_shape)
    throw ContractError("upstream gradient " + shape_str(up.shape) +
                        " does not match forward output " +
                        shape_str(tape.output_shape));
  Tensor dx(tape.input_shape);
  switch (l.kind) {
    case LayerKind::linear: {
      const Tensor &x = tape.saved.at(0);
      const Tensor &w = store.value(pname(l, "weight"));
      Tensor &dw = store.grad(pname(l, "weight"));
      double *db = l.bias ? store.grad(pname(l, "bias")).data.data() : nullptr;
      const std::size_t rows = x.rank() == 1 ? 1 : x.dim(0);
      for (std::size_t m = 0; m < rows; ++m) {
        const double *xr = x.data.data() + m * l.in;
        const double *ur = up.data.data() + m * l.out;
        double *dxr = dx.data.data() + m * l.in;
        for (std::size_t o = 0; o < l.out; ++o) {
          const double u = ur[o];
          if (db) db[o] += u;
          if (u == 0.0) continue;
          const double *wr = w.data.data() + o * l.in;
          double *dwr = dw.data.data() + o * l.in;
          for (std::size_t i = 0; i < l.in; ++i) {
            dwr[i] += u * xr[i];
            dxr[i] += u * wr[i];
          }
        }
      }
      break;
    }
    case LayerKind::conv2d: {
      const Tensor &x = tape.saved.at(0);
      const std::size_t H = x.dim(1), W = x.dim(2);
      const std::size_t kh = l.kernel_h, kw = l.kernel_w;
      const long ph = static_cast<long>(kh / 2), pw = static_cast<long>(kw / 2);
      const Tensor &w = store.value(pname(l, "weight"));
      Tensor &dw = store.grad(pname(l, "weight"));
      if (l.bias) {
        Tensor &db = store.grad(pname(l, "bias"));
        for (std::size_t co = 0; co < l.out; ++co) {
          double acc = 0.0;
          const double *ur = &up.at(co, 0, 0);
          for (std::size_t i = 0; i < H * W; ++i) acc += ur[i];
          db[co] += acc;
        }
      }
      for (std::size_t co = 0; co < l.out; ++co)
        for (std::size_t ci = 0; ci < l.in; ++ci)
          for (std::size_t ky = 0; ky < kh; ++ky)
            for (std::size_t kx = 0; kx < kw; ++kx) {
              const std::size_t widx = ((co * l.in + ci) * kh + ky) * kw + kx;
              const double wv = w.data[widx];
              const long dy = static_cast<long>(ky) - ph;
              const long ddx = static_cast<long>(kx) - pw;
              const std::size_t x0 = ddx < 0 ? static_cast<std::size_t>(-ddx) : 0;
              const std::size_t x1 = ddx > 0 ? W - static_cast<std::size_t>(ddx) : W;
              double gw = 0.0;
              for (std::size_t oy = 0; oy < H; ++oy) {
                const long iy = static_cast<long>(oy) + dy;
                if (iy < 0 || iy >= static_cast<long>(H)) continue;
                const double *ur = &up.at(co, oy, 0);
                const double *xr = &x.at(ci, static_cast<std::size_t>(iy), 0);
                double *dxr = &dx.at(ci, static_cast<std::size_t>(iy), 0);
                for (std::size_t ox = x0; ox < x1; ++ox) {
                  const long ix = static_cast<long>(ox) + ddx;
                  gw += ur[ox] * xr[ix];
                  dxr[ix] += wv * ur[ox];
                }
              }
              dw.data[widx] += gw;
            }
      break;
    }
    case LayerKind::leaky_relu:
    case LayerKind::relu: {
      const double slope = l.kind == LayerKind::relu ? 0.0 : l.slope;
      const Tensor &x = tape.saved.at(0);
      for (std::size_t i = 0; i < x.size(); ++i)
        dx.data[i] = x.data[i] > 0.0 ? up.data[i] : slope * up.data[i];
      break;
    }
    case LayerKind::softmax_rows: {
      const Tensor &y = tape.saved.at(0);
      const std::size_t R = y.dim(0), C = y.dim(1);
      for (std::size_t r = 0; r < R; ++r) {
        double dot = 0.0;
        for (std::size_t c = 0; c < C; ++c) dot += up.at(r, c) * y.at(r, c);
        for (std::size_t c = 0; c < C; ++c)
          dx.at(r, c) = y.at(r, c) * (up.at(r, c) - dot);
      }
      break;
    }
    case LayerKind::gru: {
      const Tensor &x = tape.saved.at(0), &hs = tape.saved.at(1),
                   &r = tape.saved.at(2), &z = tape.saved.at(3),
                   &n = tape.saved.at(4), &ghn = tape.saved.at(5);
      const std::size_t T = x.dim(0), Hd = l.out, I = l.in;
      const Tensor &wi = store.value(pname(l, "w_ih"));
      const Tensor &wh = store.value(pname(l, "w_hh"));
      Tensor &dwi = store.grad(pname(l, "w_ih"));
      Tensor &dwh = store.grad(pname(l, "w_hh"));
      Tensor &dbi = store.grad(pname(l, "b_ih"));
      Tensor &dbh = store.grad(pname(l, "b_hh"));
      std::vector<double> dh(Hd, 0.0), dgi(3 * Hd), dgh(3 * Hd), dh_prev(Hd);
      for (std::size_t t = T; t-- > 0;) {
        for (std::size_t j = 0; j < Hd; ++j) dh[j] += up.at(t, j);
        const double *hp = &hs.at(t, 0);
        for (std::size_t j = 0; j < Hd; ++j) {
          const double rj = r.at(t, j), zj = z.at(t, j), nj = n.at(t, j);
          const double dn = dh[j] * (1.0 - zj);
          const double dz = dh[j] * (hp[j] - nj);
          dh_prev[j] = dh[j] * zj;
          const double dan = dn * (1.0 - nj * nj);
          const double dr = dan * ghn.at(t, j);
          const double dar = dr * rj * (1.0 - rj);
          const double daz = dz * zj * (1.0 - zj);
          dgi[j] = dar;
          dgi[Hd + j] = daz;
          dgi[2 * Hd + j] = dan;
          dgh[j] = dar;
          dgh[Hd + j] = daz;
          dgh[2 * Hd + j] = dan * rj;
        }
        const double *xt = &x.at(t, 0);
        double *dxt = &dx.at(t, 0);
        for (std::size_t g = 0; g < 3 * Hd; ++g) {
          const double a = dgi[g], b = dgh[g];
          dbi[g] += a;
          dbh[g] += b;
          const double *wir = &wi.data[g * I];
          double *dwir = &dwi.data[g * I];
          for (std::size_t i = 0; i < I; ++i) {
            dwir[i] += a * xt[i];
            dxt[i] += a * wir[i];
          }
          const double *whr = &wh.data[g * Hd];
          double *dwhr = &dwh.data[g * Hd];
          for (std::size_t k = 0; k < Hd; ++k) {
            dwhr[k] += b * hp[k];
            dh_prev[k] += b * whr[k];
          }
        }
        dh = dh_prev;
      }
      break;
    }
    case LayerKind::adaptive_avg_pool: {
      const auto g = detail::pool_geometry(l, tape.input_shape);
      for (std::size_t c = 0; c < g.channels; ++c)
        for (std::size_t oh = 0; oh < g.out_h; ++oh) {
          const std::size_t h0 = detail::pool_start(oh, g.in_h, g.out_h);
          const std::size_t h1 = detail::pool_start(oh + 1, g.in_h, g.out_h);
          for (std::size_t ow = 0; ow < g.out_w; ++ow) {
            const std::size_t w0 = detail::pool_start(ow, g.in_w, g.out_w);
            const std::size_t w1 = detail::pool_start(ow + 1, g.in_w, g.out_w);
            const double share =
                up.data[(c * g.out_h + oh) * g.out_w + ow] /
                static_cast<double>((h1 - h0) * (w1 - w0));
            for (std::size_t h = h0; h < h1; ++h)
              for (std::size_t w = w0; w < w1; ++w)
                dx.data[(c * g.in_h + h) * g.in_w + w] += share;
          }
        }
      break;
    }
  }
  return dx;
}

/// A chain of layers run in order.
struct Sequential {
  std::vector<LayerSpec> layers;

  void register_params(ParameterStore &store, std::mt19937_64 &rng) const {
    for (const auto &l : layers) nn::register_params(l, store, rng);
  }

  Tensor forward(const ParameterStore &store, const Tensor &x,
                 std::vector<Tape> *tapes) const {
    if (tapes) tapes->assign(layers.size(), Tape{});
    Tensor h = x;
    for (std::size_t i = 0; i < layers.size(); ++i)
      h = nn::forward(layers[i], store, h, tapes ? &(*tapes)[i] : nullptr);
    return h;
  }

  Tensor backward(ParameterStore &store, const std::vector<Tape> &tapes,
                  const Tensor &up) const {
    if (tapes.size() != layers.size())
      throw ContractError("sequential tape count mismatch");
    Tensor g = up;
    for (std::size_t i = layers.size(); i-- > 0;)
      g = nn::backward(layers[i], store, tapes[i], g);
    return g;
  }
};

}  // namespace gedf::nn
