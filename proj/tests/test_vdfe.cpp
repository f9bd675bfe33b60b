// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "gedf/synth/scene.hpp"
#include "gedf/vdfe/direction.hpp"
#include "test_util.hpp"

using namespace gedf;
using nn::Tensor;

namespace {

vdfe::VdfeConfig small_config(std::size_t Q = 16, std::size_t K = 16) {
  vdfe::VdfeConfig c;
  c.lags = Q;
  c.theta_hidden = 12;
  c.theta_out = 4;
  c.K = K;
  c.phi_blocks = 2;
  return c;
}

nn::ParameterStore branch_store(const vdfe::VdfeBranch &b, std::uint64_t seed) {
  nn::ParameterStore store;
  std::mt19937_64 rng(seed);
  b.register_params(store, rng);
  return store;
}

}  // namespace

TEST(TimePool, PairsOfFramesAreAveraged) {
  const Tensor x({1, 4}, std::vector<double>{1, 2, 3, 4});
  const auto y = vdfe::adaptive_avg_pool_time(x, 2);
  EXPECT_EQ(y.data, (std::vector<double>{1.5, 3.5}));
}

TEST(TimePool, SingleOutputIsTimeMean) {
  const auto x = test::random_tensor({3, 11}, 1);
  const auto y = vdfe::adaptive_avg_pool_time(x, 1);
  for (std::size_t k = 0; k < 3; ++k) {
    double mean = 0.0;
    for (std::size_t t = 0; t < 11; ++t) mean += x.at(k, t) / 11.0;
    EXPECT_NEAR(y.at(k, 0), mean, 1e-15);
  }
}

TEST(TimePool, SameLengthIsIdentity) {
  const auto x = test::random_tensor({4, 9}, 2);
  EXPECT_EQ(vdfe::adaptive_avg_pool_time(x, 9).data, x.data);
}

TEST(TimePool, WindowsPartitionTheTimeAxis) {
  // Frame-count-weighted mean of the pooled outputs equals the overall mean.
  for (std::size_t T = 1; T <= 40; ++T)
    for (std::size_t N = 1; N <= T; ++N) {
      const auto x = test::random_tensor({1, T}, T * 100 + N);
      const auto y = vdfe::adaptive_avg_pool_time(x, N);
      double total = 0.0, weighted = 0.0;
      for (double v : x.data) total += v;
      for (std::size_t n = 0; n < N; ++n) {
        const std::size_t lo = n * T / N, hi = (n + 1) * T / N;
        ASSERT_GT(hi, lo);
        weighted += y.at(0, n) * static_cast<double>(hi - lo);
      }
      EXPECT_NEAR(weighted, total, 1e-12) << "T=" << T << " N=" << N;
    }
}

TEST(TimePool, UpsamplingIsRejected) {
  EXPECT_THROW(vdfe::adaptive_avg_pool_time(Tensor({2, 3}), 4), PoolingError);
  EXPECT_THROW(vdfe::adaptive_avg_pool_time(Tensor({2, 3}), 0), PoolingError);
}

TEST(VdfeBranch, OutputShape) {
  vdfe::VdfeBranch branch(small_config());
  const auto store = branch_store(branch, 3);
  const auto z = branch.forward(store, test::random_tensor({6, 16, 20}, 4), 5, nullptr);
  EXPECT_EQ(z.shape, (nn::Shape{16, 5}));
}

TEST(VdfeBranch, ZeroInputWithZeroBiasesGivesZero) {
  vdfe::VdfeBranch branch(small_config());
  auto store = branch_store(branch, 5);
  for (auto &p : store.params())
    if (p.name.find("bias") != std::string::npos)
      for (auto &v : p.value.data) v = 0.0;
  const auto z = branch.forward(store, Tensor({6, 16, 12}), 4, nullptr);
  for (double v : z.data) EXPECT_EQ(v, 0.0);
}

TEST(VdfeBranch, RejectsBadShapesAndUpsampling) {
  vdfe::VdfeBranch branch(small_config());
  const auto store = branch_store(branch, 6);
  EXPECT_THROW(branch.forward(store, Tensor({5, 16, 8}), 4, nullptr), ShapeError);
  EXPECT_THROW(branch.forward(store, Tensor({6, 15, 8}), 4, nullptr), ShapeError);
  EXPECT_THROW(branch.forward(store, Tensor({6, 16, 8}), 9, nullptr), PoolingError);
  auto bad = small_config();
  bad.phi_kernel = 2;
  EXPECT_THROW(vdfe::VdfeBranch{bad}, ConfigError);
}

TEST(VdfeBranch, GradCheck) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    vdfe::VdfeBranch branch(small_config());
    auto store = branch_store(branch, seed);
    test::randomize(store, seed + 1);
    const auto D = test::random_tensor({6, 16, 19}, seed + 2);
    store.add(test::kInputName, D.shape).value = D;
    const auto w = nn::random_projection({16, 8}, seed + 3);
    const auto res = nn::grad_check_detailed(store, [&](nn::ParameterStore &s, bool g) {
      vdfe::VdfeBranch::Tape tape;
      const auto z = branch.forward(s, s.value(test::kInputName), 8, g ? &tape : nullptr);
      if (g) nn::add_inplace(s.grad(test::kInputName), branch.backward(s, tape, w));
      return nn::project(z, w);
    });
    EXPECT_LT(res.max_relative_error, 1e-4)
        << "seed " << seed << " at " << res.worst_parameter << "[" << res.worst_index << "]";
  }
}

TEST(VdfeBranch, MirroredArrayReversesLagMapsAndChangesFeatures) {
  synth::SceneConfig cfg;
  cfg.duration_s = 2.0;
  synth::VehicleEvent e;
  e.direction = synth::Direction::left_to_right;
  e.speed_kmh = 40;
  e.t_closest = 1.0;
  cfg.events = {e};
  const auto audio = synth::synth_scene(cfg, 3).first;
  auto mirrored = audio;
  std::reverse(mirrored.channels.begin(), mirrored.channels.end());

  const std::size_t Q = 16;
  const auto D = features::gcc_phat_all(audio, Q, 1024, 320).values;
  const auto Dm = features::gcc_phat_all(mirrored, Q, 1024, 320).values;
  // Mirroring maps channel c to 3-c, so each pair becomes another pair with
  // its roles swapped.
  const std::size_t partner[6] = {5, 4, 2, 3, 1, 0};
  const std::size_t T = D.dim(2);
  for (std::size_t p = 0; p < 6; ++p)
    for (std::size_t q = 1; q < Q; ++q)
      for (std::size_t t = 0; t < T; ++t)
        EXPECT_NEAR(Dm.at(p, q, t), D.at(partner[p], Q - q, t), 1e-9);

  vdfe::VdfeBranch branch(small_config(Q));
  const auto store = branch_store(branch, 7);
  const auto z = branch.forward(store, D, 8, nullptr);
  const auto zm = branch.forward(store, Dm, 8, nullptr);
  EXPECT_GT(nn::max_abs_diff(z, zm), 1e-6);
}

TEST(VdfeBranch, ConvenienceWrapperMatchesForward) {
  vdfe::VdfeBranch branch(small_config());
  const auto store = branch_store(branch, 8);
  features::GccPhatFeatures D{test::random_tensor({6, 16, 10}, 9)};
  EXPECT_EQ(vdfe::direction_features(D, store, branch, 3).data,
            branch.forward(store, D.values, 3, nullptr).data);
}
