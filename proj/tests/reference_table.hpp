// SPDX-License-Identifier: Apache-2.0
// Published per-location metrics for four count estimators, used to check
// the ranking score against the reported values.
#pragma once

#include <array>
#include <string>

#include "gedf/eval/metrics.hpp"

namespace gedf::test {

// Per category: (kendall, rmse) for loc1..loc6.
using CategoryRow = std::array<double, 12>;

struct ReferenceSystem {
  const char *name;
  std::array<CategoryRow, 4> rows;  // car_left, car_right, cv_left, cv_right
  double reported_score;
};

// clang-format off
inline const std::array<ReferenceSystem, 4> kReferenceSystems = {{
    {"Baseline",
     {{{0.445, 2.555, 0.579, 3.074, 0.543, 1.731, 0.195, 1.997, 0.575, 0.693, 0.804, 1.628},
       {0.423, 2.978, 0.337, 2.917, 0.569, 1.294, 0.038, 1.674, 0.371, 0.693, 0.700, 1.822},
       {0.084, 0.918, 0.044, 0.813, 0.034, 0.309, 0.000, 0.655, 0.068, 0.362, 0.763, 0.509},
       {0.076, 0.882, 0.051, 0.604, 0.322, 0.212, 0.000, 0.463, 0.257, 0.252, 0.641, 0.530}}},
     2.708},
    {"w/o -P",
     {{{0.410, 2.654, 0.630, 2.510, 0.555, 1.716, 0.049, 2.295, 0.582, 0.629, 0.805, 1.646},
       {0.440, 2.920, 0.516, 2.239, 0.572, 1.281, -0.063, 2.882, 0.394, 0.679, 0.704, 1.810},
       {0.176, 0.909, -0.034, 0.850, 0.174, 0.307, 0.000, 0.655, 0.045, 0.351, 0.690, 0.601},
       {0.117, 0.937, -0.051, 0.717, 0.299, 0.212, 0.000, 0.463, 0.361, 0.238, 0.521, 0.648}}},
     2.521},
    {"w/o -G",
     {{{0.393, 2.765, 0.700, 2.157, 0.548, 1.724, 0.634, 1.174, 0.525, 0.745, 0.811, 1.549},
       {0.441, 2.970, 0.474, 2.544, 0.575, 1.289, 0.341, 0.958, 0.397, 0.694, 0.694, 1.837},
       {0.172, 0.962, 0.143, 0.798, 0.009, 0.314, 0.296, 0.607, -0.047, 0.361, 0.743, 0.582},
       {0.126, 0.954, 0.058, 0.726, -0.002, 0.222, 0.120, 0.613, -0.083, 0.300, 0.611, 0.576}}},
     2.583},
    {"GEDF-Net",
     {{{0.434, 2.600, 0.719, 2.177, 0.551, 1.729, 0.097, 2.095, 0.557, 0.708, 0.816, 1.582},
       {0.448, 2.919, 0.401, 2.666, 0.577, 1.275, 0.240, 1.548, 0.401, 0.697, 0.684, 1.910},
       {0.207, 0.892, 0.226, 0.783, 0.171, 0.315, 0.182, 0.604, 0.058, 0.362, 0.683, 0.604},
       {0.126, 0.861, 0.171, 0.677, 0.377, 0.195, 0.445, 0.428, 0.357, 0.208, 0.570, 0.594}}},
     2.042},
}};
// clang-format on

inline eval::MetricGrid reference_grid(const ReferenceSystem &sys) {
  eval::MetricGrid g;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t l = 0; l < 6; ++l) {
      g.at(l, c, eval::Metric::kendall) = sys.rows[c][2 * l];
      g.at(l, c, eval::Metric::rmse) = sys.rows[c][2 * l + 1];
    }
  return g;
}

inline eval::RankingInput reference_input() {
  eval::RankingInput in;
  for (const auto &sys : kReferenceSystems) in.emplace_back(sys.name, reference_grid(sys));
  return in;
}

}  // namespace gedf::test
