// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>

#include "gedf/fusion/train.hpp"
#include "gedf/synth/scene.hpp"
#include "test_util.hpp"

using namespace gedf;
using fusion::CountPredictor;
using fusion::FrameFusion;
using nn::Tensor;

namespace {

fusion::ModelConfig tiny_model() {
  fusion::ModelConfig m;
  m.features.mel.window = 256;
  m.features.mel.hop = 128;
  m.features.mel.bins = 16;
  m.features.gcc_lags = 16;
  m.backend.blocks = 2;
  m.backend.channels = 4;
  m.backend.K = 16;
  m.backend.pool_factor = 2;
  m.theta_hidden = 8;
  m.theta_out = 4;
  m.phi_blocks = 1;
  m.fusion_dim = 12;
  m.d = 16;
  return m;
}

nn::ParameterStore fusion_store(const FrameFusion &f, std::uint64_t seed) {
  nn::ParameterStore store;
  std::mt19937_64 rng(seed);
  f.register_params(store, rng);
  return store;
}

std::vector<fusion::TrainSample> tiny_samples(const fusion::GedfNet &net, std::size_t n,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  synth::RandomSceneOptions opt;
  opt.duration_s = 0.5;
  opt.max_events_per_category = 1;
  std::vector<fusion::TrainSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto cfg = synth::random_scene_config("loc3", opt, rng);
    const auto [audio, label] = synth::synth_scene(cfg, rng());
    out.push_back({net.features_of(audio), fusion::target_of(label)});
  }
  return out;
}

}  // namespace

TEST(FrameFusion, ZeroParametersGiveZeroState) {
  FrameFusion f(5, 6, 7);
  auto store = fusion_store(f, 1);
  for (auto &p : store.params()) std::fill(p.value.data.begin(), p.value.data.end(), 0.0);
  const auto z = f.forward(store, Tensor({5, 9}), Tensor({5, 9}), nullptr);
  ASSERT_EQ(z.shape, (nn::Shape{7}));
  for (double v : z.data) EXPECT_EQ(v, 0.0);
}

TEST(FrameFusion, OutputSizeIndependentOfFrameCount) {
  FrameFusion f(4, 8, 10);
  const auto store = fusion_store(f, 2);
  for (std::size_t N : {1u, 3u, 17u}) {
    const auto z = f.forward(store, test::random_tensor({4, N}, N),
                             test::random_tensor({4, N}, N + 50), nullptr);
    EXPECT_EQ(z.shape, (nn::Shape{10}));
  }
}

TEST(FrameFusion, MisalignedBranchesNameBothFrameCounts) {
  FrameFusion f(4, 8, 10);
  const auto store = fusion_store(f, 3);
  try {
    f.forward(store, Tensor({4, 7}), Tensor({4, 9}), nullptr);
    FAIL();
  } catch (const AlignmentError &e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("N=7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("N=9"), std::string::npos) << msg;
  }
  EXPECT_THROW(f.forward(store, Tensor({3, 7}), Tensor({3, 7}), nullptr), ShapeError);
}

TEST(FrameFusion, FrameOrderMatters) {
  FrameFusion f(3, 6, 5);
  const auto store = fusion_store(f, 4);
  const auto ZT = test::random_tensor({3, 6}, 5);
  const auto ZD = test::random_tensor({3, 6}, 6);
  Tensor rT(ZT.shape), rD(ZD.shape);
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t n = 0; n < 6; ++n) {
      rT.at(k, n) = ZT.at(k, 5 - n);
      rD.at(k, n) = ZD.at(k, 5 - n);
    }
  EXPECT_GT(nn::max_abs_diff(f.forward(store, ZT, ZD, nullptr), f.forward(store, rT, rD, nullptr)),
            1e-6);
}

TEST(FrameFusion, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    FrameFusion f(4, 6, 5);
    auto store = fusion_store(f, seed);
    store.add("__zt", {4, 8}).value = test::random_tensor({4, 8}, seed + 2);
    store.add("__zd", {4, 8}).value = test::random_tensor({4, 8}, seed + 3);
    const auto w = nn::random_projection({5}, seed + 4);
    const auto res = nn::grad_check_detailed(store, [&](nn::ParameterStore &s, bool g) {
      FrameFusion::Tape tape;
      const auto z = f.forward(s, s.value("__zt"), s.value("__zd"), g ? &tape : nullptr);
      if (g) {
        const auto [dT, dD] = f.backward(s, tape, w);
        nn::add_inplace(s.grad("__zt"), dT);
        nn::add_inplace(s.grad("__zd"), dD);
      }
      return nn::project(z, w);
    });
    EXPECT_LT(res.max_relative_error, 1e-4)
        << "seed " << seed << " at " << res.worst_parameter << "[" << res.worst_index << "]";
  }
}

TEST(CountPredictor, ZeroWeightsReturnRectifiedBias) {
  CountPredictor head(3);
  nn::ParameterStore store;
  std::mt19937_64 rng(7);
  head.register_params(store, rng);
  std::fill(store.value("predictor.weight").data.begin(),
            store.value("predictor.weight").data.end(), 0.0);
  store.value("predictor.bias").data = {1, 2, 0, -1};
  const auto y = fusion::predict_counts(test::random_tensor({3}, 8), store, head);
  EXPECT_EQ(y.data, (std::vector<double>{1, 2, 0, 0}));
}

TEST(CountPredictor, OutputsAreNonNegative) {
  CountPredictor head(6);
  nn::ParameterStore store;
  std::mt19937_64 rng(9);
  head.register_params(store, rng);
  for (std::uint64_t s = 0; s < 100; ++s) {
    test::randomize(store, s, -2.0, 2.0);
    for (double v : fusion::predict_counts(test::random_tensor({6}, s + 1000, -3, 3), store, head)
                        .data)
      EXPECT_GE(v, 0.0);
  }
}

TEST(CountPredictor, BiasStartsPositive) {
  CountPredictor head(6);
  nn::ParameterStore store;
  std::mt19937_64 rng(10);
  head.register_params(store, rng);
  for (double b : store.value("predictor.bias").data) EXPECT_EQ(b, fusion::kPredictorBiasInit);
}

TEST(CountLoss, PerfectPredictionIsZero) {
  const Tensor y({4}, std::vector<double>{1, 0, 2, 3});
  EXPECT_EQ(fusion::count_loss(y, {1, 0, 2, 3}), 0.0);
}

TEST(CountLoss, WorkedExample) {
  const Tensor y({4}, std::vector<double>{1, 1, 1, 1});
  EXPECT_DOUBLE_EQ(fusion::count_loss(y, {1, 1, 1, 0}), 0.25);
  EXPECT_THROW(fusion::count_loss(Tensor({3}), {0, 0, 0, 0}), ShapeError);
}

TEST(CountLoss, GradientMatchesFiniteDifferences) {
  const fusion::CountTarget target{2, 0, 1, 3};
  auto y = test::random_tensor({4}, 11, 0.0, 4.0);
  const auto g = fusion::count_loss_grad(y, target);
  for (std::size_t c = 0; c < 4; ++c) {
    const double saved = y[c];
    y[c] = saved + 1e-5;
    const double lp = fusion::count_loss(y, target);
    y[c] = saved - 1e-5;
    const double lm = fusion::count_loss(y, target);
    y[c] = saved;
    EXPECT_NEAR(g[c], (lp - lm) / 2e-5, 1e-6);
  }
}

TEST(GedfNet, EndToEndGradCheck) {
  const fusion::GedfNet net(tiny_model());
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto store = net.init_params(seed);
    // Keep the head active so the loss is not flat.
    store.value("predictor.bias").data = {2, 2, 2, 2};
    store.add("__mel", {4, 16, 16}).value = test::random_tensor({4, 16, 16}, seed + 2, -3, 3);
    store.add("__gcc", {6, 16, 16}).value = test::random_tensor({6, 16, 16}, seed + 3, 0, 1);
    const fusion::CountTarget target{1, 0, 2, 1};
    const auto res = nn::grad_check_detailed(store, [&](nn::ParameterStore &s, bool g) {
      fusion::GedfNet::Tape tape;
      const auto out = net.forward(s, s.value("__mel"), s.value("__gcc"), g ? &tape : nullptr);
      if (g) {
        const auto [dmel, dgcc] = net.backward(s, tape, fusion::count_loss_grad(out.y, target));
        nn::add_inplace(s.grad("__mel"), dmel);
        nn::add_inplace(s.grad("__gcc"), dgcc);
      }
      return fusion::count_loss(out.y, target);
    });
    EXPECT_LT(res.max_relative_error, 1e-4)
        << "seed " << seed << " at " << res.worst_parameter << "[" << res.worst_index << "]";
  }
}

TEST(GedfNet, InvalidMelScaleIsRejected) {
  auto cfg = tiny_model();
  cfg.mel_scale = 0.0;
  EXPECT_THROW(fusion::GedfNet{cfg}, ConfigError);
}

TEST(GedfNet, InferShapesAndStochasticGraph) {
  const fusion::GedfNet net(tiny_model());
  const auto store = net.init_params(12);
  synth::SceneConfig cfg;
  cfg.duration_s = 1.0;
  synth::VehicleEvent e;
  e.t_closest = 0.5;
  cfg.events = {e};
  const auto audio = synth::synth_scene(cfg, 13).first;
  const auto [y, A] = fusion::infer(net, store, audio);
  EXPECT_EQ(y.shape, (nn::Shape{4}));
  const auto T = net.features_of(audio).log_mel.values.dim(2);
  const auto N = vtfe::embedded_frames(T, 2);
  ASSERT_EQ(A.shape, (nn::Shape{N, N}));
  for (std::size_t i = 0; i < N; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < N; ++j) row += A.at(i, j);
    EXPECT_NEAR(row, 1.0, 1e-12);
  }
}

TEST(GedfNet, SilenceGivesFiniteOutput) {
  const fusion::GedfNet net(tiny_model());
  const auto store = net.init_params(14);
  const MultiChannelAudio silence(8000, 16000);
  const auto [y, A] = fusion::infer(net, store, silence);
  for (double v : y.data) EXPECT_TRUE(std::isfinite(v));
  for (double v : A.data) EXPECT_TRUE(std::isfinite(v));
}

TEST(GedfNet, CheckpointForOtherArchitectureIsRejected) {
  const auto dir = test::temp_dir("fusion_ckpt");
  auto small = tiny_model();
  small.d = 8;
  const fusion::GedfNet a(small), b(tiny_model());
  nn::save_checkpoint(a.init_params(0), dir / "a.bin");
  try {
    fusion::load_trained(b, dir / "a.bin");
    FAIL();
  } catch (const CheckpointError &e) {
    EXPECT_NE(std::string(e.what()).find("fusion.gru"), std::string::npos) << e.what();
  }
  nn::save_checkpoint(b.init_params(3), dir / "b.bin");
  EXPECT_EQ(fusion::load_trained(b, dir / "b.bin").value("predictor.weight").data,
            b.init_params(3).value("predictor.weight").data);
}

TEST(Training, ZeroEpochsReturnsInitialization) {
  const fusion::GedfNet net(tiny_model());
  fusion::TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 21;
  const auto res = fusion::train_on_samples(net, {}, cfg);
  EXPECT_TRUE(res.epoch_losses.empty());
  const auto init = net.init_params(21);
  for (const auto &p : init.params()) EXPECT_EQ(res.store.value(p.name).data, p.value.data);
}

TEST(Training, EmptySetIsRejected) {
  const fusion::GedfNet net(tiny_model());
  fusion::TrainConfig cfg;
  cfg.epochs = 1;
  EXPECT_THROW(fusion::train_on_samples(net, {}, cfg), EmptyInputError);
  cfg.batch = 0;
  EXPECT_THROW(fusion::train_on_samples(net, {}, cfg), ConfigError);
}

TEST(Training, DeterministicAndDecreasingOnTinySet) {
  const fusion::GedfNet net(tiny_model());
  const auto samples = tiny_samples(net, 6, 22);
  fusion::TrainConfig cfg;
  cfg.epochs = 25;
  cfg.batch = 2;
  cfg.lr = 3e-3;
  cfg.seed = 5;
  std::vector<std::size_t> seen;
  const auto a = fusion::train_on_samples(net, samples, cfg,
                                          [&](std::size_t epoch, double) { seen.push_back(epoch); });
  const auto b = fusion::train_on_samples(net, samples, cfg);
  EXPECT_EQ(fusion::format_loss_log(a.epoch_losses), fusion::format_loss_log(b.epoch_losses));
  ASSERT_EQ(a.epoch_losses.size(), 25u);
  EXPECT_EQ(seen.size(), 25u);
  EXPECT_LT(a.epoch_losses.back(), a.epoch_losses.front());
  for (const auto &p : a.store.params()) EXPECT_EQ(b.store.value(p.name).data, p.value.data);
}

TEST(Training, LossLogFormat) {
  EXPECT_EQ(fusion::format_loss_log({0.5, 0.25}), "1,0.5\n2,0.25\n");
  EXPECT_EQ(fusion::format_loss_log({}), "");
}
