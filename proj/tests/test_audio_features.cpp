// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "gedf/features/frontend.hpp"
#include "gedf/features/gcc_phat.hpp"
#include "gedf/features/mel.hpp"
#include "gedf/features/stft.hpp"
#include "gedf/synth/scene.hpp"
#include "test_util.hpp"

using namespace gedf;
using features::Complex;

namespace {

std::vector<double> white_noise(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, sigma);
  std::vector<double> x(n);
  for (auto &v : x) v = g(rng);
  return x;
}

/// k[n] = c[n - d]: k lags c by d samples.
std::vector<double> delayed(const std::vector<double> &c, long d) {
  std::vector<double> k(c.size(), 0.0);
  for (std::size_t n = 0; n < c.size(); ++n) {
    const long src = static_cast<long>(n) - d;
    if (src >= 0 && src < static_cast<long>(c.size())) k[n] = c[static_cast<std::size_t>(src)];
  }
  return k;
}

/// Direct O(n^2) DFT of one Hann-windowed frame.
std::vector<Complex> direct_dft(const std::vector<double> &x, std::size_t start, std::size_t n) {
  const auto w = features::hann_window(n);
  std::vector<Complex> out(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    Complex acc = 0.0;
    for (std::size_t t = 0; t < n; ++t)
      acc += x[start + t] * w[t] *
             std::polar(1.0, -2.0 * std::numbers::pi * double(k) * double(t) / double(n));
    out[k] = acc;
  }
  return out;
}

MultiChannelAudio audio_from(const std::array<std::vector<double>, 4> &ch, double rate = 16000) {
  MultiChannelAudio a(ch[0].size(), rate);
  a.channels = ch;
  return a;
}

}  // namespace

TEST(Stft, ZeroInputGivesZeroSpectrogram) {
  const auto s = features::stft(std::vector<double>(4096, 0.0), 512, 128);
  for (const auto &v : s.values) EXPECT_EQ(std::abs(v), 0.0);
}

TEST(Stft, ShapeFollowsWindowAndHop) {
  const auto s = features::stft(std::vector<double>(5000, 0.1), 1024, 320);
  EXPECT_EQ(s.bins, 513u);
  EXPECT_EQ(s.frames, (5000u - 1024u) / 320u + 1u);
}

TEST(Stft, TooShortAndBadWindowAreErrors) {
  EXPECT_THROW(features::stft(std::vector<double>(1000, 0.0), 1024, 320), InputTooShortError);
  EXPECT_THROW(features::stft(std::vector<double>(1000, 0.0), 300, 100), ConfigError);
}

TEST(Stft, BinCentredSinusoidPeaksAtItsBinAndMatchesDirectDft) {
  const std::size_t n = 256, bin = 19;
  std::vector<double> x(1024);
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = std::sin(2.0 * std::numbers::pi * double(bin) * double(i) / double(n) + 0.3);
  const auto s = features::stft(x, n, 100);
  for (std::size_t t = 0; t < s.frames; ++t) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < s.bins; ++f)
      if (std::abs(s.at(f, t)) > std::abs(s.at(best, t))) best = f;
    EXPECT_EQ(best, bin);
    const auto ref = direct_dft(x, t * 100, n);
    for (std::size_t f = 0; f < s.bins; ++f) EXPECT_NEAR(std::abs(s.at(f, t) - ref[f]), 0.0, 1e-9);
  }
}

TEST(Stft, ParsevalPerFrame) {
  const std::size_t n = 512;
  const auto x = white_noise(4000, 3);
  const auto s = features::stft(x, n, 200);
  const auto w = features::hann_window(n);
  for (std::size_t t = 0; t < s.frames; ++t) {
    double time_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) time_energy += std::pow(x[t * 200 + i] * w[i], 2);
    double freq_energy = std::norm(s.at(0, t)) + std::norm(s.at(n / 2, t));
    for (std::size_t f = 1; f < n / 2; ++f) freq_energy += 2.0 * std::norm(s.at(f, t));
    freq_energy /= static_cast<double>(n);
    EXPECT_NEAR(freq_energy / time_energy, 1.0, 1e-6);
  }
}

TEST(Stft, IsLinear) {
  const auto x = white_noise(3000, 1), y = white_noise(3000, 2);
  const double a = 0.7, b = -1.9;
  std::vector<double> mix(3000);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * x[i] + b * y[i];
  const auto sx = features::stft(x, 512, 256), sy = features::stft(y, 512, 256);
  const auto sm = features::stft(mix, 512, 256);
  for (std::size_t i = 0; i < sm.values.size(); ++i)
    EXPECT_NEAR(std::abs(sm.values[i] - (a * sx.values[i] + b * sy.values[i])), 0.0, 1e-9);
}

TEST(LogMel, SilenceSitsOnTheFloor) {
  MultiChannelAudio a(8000, 16000);
  features::MelConfig cfg;
  const auto m = features::log_mel(a, cfg);
  for (double v : m.values.data) EXPECT_EQ(v, std::log(cfg.log_floor));
}

TEST(LogMel, ShapeIsFourByBinsByFrames) {
  MultiChannelAudio a(16000, 16000);
  for (auto &ch : a.channels) ch = white_noise(16000, 5, 0.1);
  features::MelConfig cfg;
  cfg.bins = 40;
  const auto m = features::log_mel(a, cfg);
  EXPECT_EQ(m.values.shape, (nn::Shape{4, 40, features::frame_count(16000, 1024, 320)}));
  for (double v : m.values.data) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, std::log(cfg.log_floor));
  }
}

TEST(LogMel, DoublingAmplitudeAddsLogFour) {
  MultiChannelAudio a(12000, 16000), b(12000, 16000);
  for (std::size_t c = 0; c < 4; ++c) {
    a.channels[c] = white_noise(12000, 10 + c, 0.05);
    for (std::size_t i = 0; i < 12000; ++i) b.channels[c][i] = 2.0 * a.channels[c][i];
  }
  features::MelConfig cfg;
  const auto ma = features::log_mel(a, cfg), mb = features::log_mel(b, cfg);
  const double floor = std::log(cfg.log_floor);
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ma.values.size(); ++i) {
    if (ma.values.data[i] == floor) continue;
    EXPECT_NEAR(mb.values.data[i] - ma.values.data[i], std::log(4.0), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(LogMel, FilterbankTrianglesAreNonNegative) {
  features::MelFilterbank fb(64, 1024, 16000, 50, 8000);
  for (std::size_t b = 0; b < fb.bins(); ++b) {
    double peak = 0.0;
    for (std::size_t k = 0; k < fb.fft_bins(); ++k) {
      EXPECT_GE(fb.weight(b, k), 0.0);
      peak = std::max(peak, fb.weight(b, k));
    }
    EXPECT_LE(peak, 1.0);
  }
}

namespace {

nn::ParameterStore compressor_store(const features::ChannelCompressor &c,
                                    std::array<double, 4> w, double bias) {
  nn::ParameterStore s;
  std::mt19937_64 rng(0);
  c.register_params(s, rng);
  for (std::size_t i = 0; i < 4; ++i) s.value("compress.weight")[i] = w[i];
  s.value("compress.bias")[0] = bias;
  return s;
}

}  // namespace

TEST(Compress, SelectorKernelReturnsFirstChannel) {
  features::ChannelCompressor comp;
  const auto s = compressor_store(comp, {1, 0, 0, 0}, 0.0);
  const auto x = test::random_tensor({4, 6, 5}, 1);
  const auto y = comp.forward(s, x, nullptr);
  ASSERT_EQ(y.shape, (nn::Shape{1, 6, 5}));
  for (std::size_t i = 0; i < 30; ++i) EXPECT_EQ(y.data[i], x.data[i]);
}

TEST(Compress, AveragingKernelReturnsChannelMean) {
  features::ChannelCompressor comp;
  const auto s = compressor_store(comp, {0.25, 0.25, 0.25, 0.25}, 0.0);
  const auto x = test::random_tensor({4, 3, 7}, 2);
  const auto y = comp.forward(s, x, nullptr);
  for (std::size_t b = 0; b < 3; ++b)
    for (std::size_t t = 0; t < 7; ++t) {
      const double mean = (x.at(0, b, t) + x.at(1, b, t) + x.at(2, b, t) + x.at(3, b, t)) / 4.0;
      EXPECT_NEAR(y.at(0, b, t), mean, 1e-15);
    }
}

TEST(Compress, WeightGradientMatchesFiniteDifferences) {
  features::ChannelCompressor comp;
  const auto x = test::random_tensor({4, 5, 6}, 3);
  const auto w = nn::random_projection({1, 5, 6}, 4);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    nn::ParameterStore s;
    std::mt19937_64 rng(seed);
    comp.register_params(s, rng);
    test::randomize(s, seed);
    s.add(test::kInputName, x.shape).value = x;
    const double err = nn::grad_check(s, [&](nn::ParameterStore &st, bool g) {
      nn::Tape tape;
      const auto y = comp.forward(st, st.value(test::kInputName), g ? &tape : nullptr);
      if (g) nn::add_inplace(st.grad(test::kInputName), comp.backward(st, tape, w));
      return nn::project(y, w);
    });
    EXPECT_LT(err, 1e-4);
  }
}

TEST(Compress, ShapeErrorNamesDimensions) {
  features::ChannelCompressor comp;
  const auto s = compressor_store(comp, {1, 1, 1, 1}, 0.0);
  try {
    comp.forward(s, nn::Tensor({3, 4, 5}), nullptr);
    FAIL();
  } catch (const ShapeError &e) {
    EXPECT_NE(std::string(e.what()).find("[3x4x5]"), std::string::npos) << e.what();
  }
}

TEST(Compress, IsLinearInInputWithoutBias) {
  features::ChannelCompressor comp;
  const auto s = compressor_store(comp, {0.3, -1.2, 0.8, 2.0}, 0.0);
  const auto x = test::random_tensor({4, 4, 4}, 5), y = test::random_tensor({4, 4, 4}, 6);
  nn::Tensor mix(x.shape);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data[i] = 1.5 * x.data[i] - 0.5 * y.data[i];
  const auto cx = comp.forward(s, x, nullptr), cy = comp.forward(s, y, nullptr);
  const auto cm = comp.forward(s, mix, nullptr);
  for (std::size_t i = 0; i < cm.size(); ++i)
    EXPECT_NEAR(cm.data[i], 1.5 * cx.data[i] - 0.5 * cy.data[i], 1e-12);
}

TEST(GccPhat, IdenticalChannelsPeakAtZeroLag) {
  const auto x = white_noise(8192, 7);
  const auto s = features::stft(x, 1024, 512);
  const auto map = features::gcc_phat_pair(s, s, 64);
  for (long lag : features::argmax_lags(map)) EXPECT_EQ(lag, 0);
}

TEST(GccPhat, FiveSampleDelayPeaksAtPlusFiveLikeTimeDomainCorrelation) {
  const auto c = white_noise(8192, 8);
  const auto k = delayed(c, 5);
  const std::size_t n = 1024, hop = 1024, Q = 64;
  const auto sc = features::stft(c, n, hop), sk = features::stft(k, n, hop);
  const auto lags = features::argmax_lags(features::gcc_phat_pair(sc, sk, Q));
  const auto w = features::hann_window(n);
  for (std::size_t t = 0; t < sc.frames; ++t) {
    EXPECT_EQ(lags[t], 5);
    // Oracle: windowed time-domain cross-correlation r(l) = sum c[n] k[n+l].
    long best = 0;
    double best_v = -1e300;
    for (long l = -long(Q / 2); l < long(Q / 2); ++l) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const long j = long(i) + l;
        if (j < 0 || j >= long(n)) continue;
        acc += c[t * hop + i] * w[i] * k[t * hop + std::size_t(j)] * w[std::size_t(j)];
      }
      if (acc > best_v) {
        best_v = acc;
        best = l;
      }
    }
    EXPECT_EQ(best, lags[t]);
  }
}

TEST(GccPhat, IndependentNoiseHasNoDominantLag) {
  const std::size_t n = 1024, Q = 64, frames = 200;
  const auto c = white_noise(n * frames, 21), k = white_noise(n * frames, 22);
  const auto lags = features::argmax_lags(
      features::gcc_phat_pair(features::stft(c, n, n), features::stft(k, n, n), Q));
  ASSERT_EQ(lags.size(), frames);
  std::map<long, std::size_t> hist;
  for (long l : lags) ++hist[l];
  for (const auto &[lag, count] : hist)
    EXPECT_LE(double(count), 3.0 / double(Q) * double(frames)) << "lag " << lag;
}

TEST(GccPhat, WhitenedValuesAreBoundedByOne) {
  const auto c = white_noise(6000, 30), k = white_noise(6000, 31);
  const auto map =
      features::gcc_phat_pair(features::stft(c, 512, 256), features::stft(k, 512, 256), 512);
  for (double v : map.data) EXPECT_LE(std::abs(v), 1.0 + 1e-6);
}

TEST(GccPhat, SilenceGivesFlatImpulseAtZeroLag) {
  const auto s = features::stft(std::vector<double>(2048, 0.0), 512, 256);
  const auto map = features::gcc_phat_pair(s, s, 16);
  for (std::size_t t = 0; t < s.frames; ++t)
    for (std::size_t q = 0; q < 16; ++q)
      EXPECT_NEAR(map.at(q, t), features::lag_of_index(q, 16) == 0 ? 1.0 : 0.0, 1e-12);
}

TEST(GccPhat, PairAntisymmetryIsLagReversal) {
  const auto c = white_noise(6000, 40), k = delayed(white_noise(6000, 40), 3);
  const auto sc = features::stft(c, 512, 256), sk = features::stft(k, 512, 256);
  const std::size_t Q = 32;
  const auto ck = features::gcc_phat_pair(sc, sk, Q), kc = features::gcc_phat_pair(sk, sc, Q);
  for (std::size_t t = 0; t < sc.frames; ++t)
    for (std::size_t q = 1; q < Q; ++q)  // lag -Q/2 has no mirror inside the window
      EXPECT_NEAR(kc.at(q, t), ck.at(Q - q, t), 1e-9);
}

TEST(GccPhat, MismatchedShapesAreShapeErrors) {
  const auto a = features::stft(white_noise(4096, 1), 512, 256);
  const auto b = features::stft(white_noise(5000, 1), 512, 256);
  EXPECT_THROW(features::gcc_phat_pair(a, b, 16), ShapeError);
}

TEST(GccPhat, AllPairsShapeAndSwappedIdenticalChannelsAreSymmetric) {
  const auto x = white_noise(8000, 50, 0.2), y = white_noise(8000, 51, 0.2);
  const auto audio = audio_from({x, x, y, delayed(y, 2)});
  const std::size_t Q = 32;
  const auto g = features::gcc_phat_all(audio, Q, 512, 256);
  EXPECT_EQ(g.values.shape, (nn::Shape{6, Q, features::frame_count(8000, 512, 256)}));
  // Pair (0,1) compares two identical channels.
  for (std::size_t t = 0; t < g.frames(); ++t)
    for (std::size_t q = 1; q < Q; ++q)
      EXPECT_NEAR(g.values.at(0, q, t), g.values.at(0, Q - q, t), 1e-9);
}

TEST(GccPhat, PassByFlipsWidestPairLagSign) {
  synth::SceneConfig cfg;
  cfg.noise_level = 0.0;
  synth::VehicleEvent e;
  e.type = synth::VehicleType::car;
  e.direction = synth::Direction::left_to_right;
  e.speed_kmh = 50.0;
  e.t_closest = 5.0;
  cfg.events = {e};
  const auto [audio, label] = synth::synth_scene(cfg, 3);
  const std::size_t window = 1024, hop = 320, Q = 64;
  const auto g = features::gcc_phat_all(audio, Q, window, hop);
  nn::Tensor widest({Q, g.frames()});
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t t = 0; t < g.frames(); ++t) widest.at(q, t) = g.values.at(2, q, t);
  const auto lags = features::argmax_lags(widest);
  auto frame_at = [&](double sec) {
    return static_cast<std::size_t>((sec * cfg.sample_rate - window / 2.0) / hop);
  };
  // Geometry oracle: k lagging c by d seconds means delay(c,k) = -d.
  for (double dt : {-1.5, -1.0, 1.0, 1.5}) {
    const double delay = synth::pass_by_delay_profile(cfg, e, e.t_closest + dt, {0, 3});
    const double expect = -delay * cfg.sample_rate;
    const long got = lags[frame_at(e.t_closest + dt)];
    EXPECT_NEAR(double(got), expect, 1.5) << "dt " << dt;
  }
  EXPECT_LT(lags[frame_at(e.t_closest - 1.0)] * lags[frame_at(e.t_closest + 1.0)], 0);
}
