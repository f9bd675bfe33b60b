// SPDX-License-Identifier: Apache-2.0
/**
 * @file   gedf.hpp
 * @brief  Umbrella header.
 */
#pragma once

#include "gedf/audio.hpp"
#include "gedf/error.hpp"
#include "gedf/eval/heatmap.hpp"
#include "gedf/eval/metrics.hpp"
#include "gedf/eval/report.hpp"
#include "gedf/features/fft.hpp"
#include "gedf/features/frontend.hpp"
#include "gedf/features/gcc_phat.hpp"
#include "gedf/features/mel.hpp"
#include "gedf/features/stft.hpp"
#include "gedf/fusion/model.hpp"
#include "gedf/fusion/predictor.hpp"
#include "gedf/fusion/train.hpp"
#include "gedf/nn/checkpoint.hpp"
#include "gedf/nn/grad_check.hpp"
#include "gedf/nn/layers.hpp"
#include "gedf/nn/optimizer.hpp"
#include "gedf/nn/parameter_store.hpp"
#include "gedf/nn/tensor.hpp"
#include "gedf/synth/dataset.hpp"
#include "gedf/synth/scene.hpp"
#include "gedf/synth/wav.hpp"
#include "gedf/vdfe/direction.hpp"
#include "gedf/vtfe/branch.hpp"
#include "gedf/vtfe/embedding.hpp"
#include "gedf/vtfe/graph_attention.hpp"
