/* Copyright (c) 2026 The hiqc Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hiqc/corpus.hpp"
#include "hiqc/kernels.hpp"
#include "hiqc/losses.hpp"
#include "hiqc/model.hpp"
#include "hiqc/random.hpp"

namespace hiqc {

struct TrainConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossWeights weights;
  std::size_t early_stop_patience = 5;

  void validate() const;
  kernels::AdamHyper adam() const {
    return {learning_rate, adam_beta1, adam_beta2, adam_eps};
  }
};

struct EpochStats {
  std::size_t epoch = 0;
  double classification = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double total = 0.0;
  double val_micro_f1 = 0.0;
  double val_macro_f1 = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  std::size_t stopped_epoch = 0;
  std::size_t best_epoch = 0;
  double best_val_macro_f1 = 0.0;

  nlohmann::json to_json() const;
};

struct AdamState {
  Gradients m;
  Gradients v;
  long step = 0;

  static AdamState zeros_like(const ModelParams& p);
};

/// One bias-corrected Adam update over every trainable parameter group.
void adam_step(ModelParams& p, const Gradients& grads, AdamState& state, const TrainConfig& cfg);

struct LossBreakdown {
  double classification = 0.0;
  double intra = 0.0;
  double inter = 0.0;
  double total = 0.0;
};

/// Forward pass, all loss terms and (when `grads` is given) the accumulated
/// gradient of the combined objective. Every record must be labeled.
LossBreakdown batch_loss(const ModelContext& ctx, const ModelParams& p,
                         std::span<const QueryRecord> batch, const LossWeights& w,
                         Gradients* grads = nullptr);

/// Splits the training set into batches for one epoch. Every batch holds two
/// queries from different children of one parent whenever some parent has at
/// least two children present; the rest of each batch streams through a
/// shuffled pass over the whole set.
std::vector<std::vector<std::size_t>> plan_epoch(std::span<const QueryRecord> train,
                                                 const Taxonomy& t, std::size_t batch_size,
                                                 Rng& rng);

/// Adam on the combined objective with early stopping on validation
/// Macro-F1 (train Macro-F1 when validation is empty). Returns the
/// best-scoring parameters.
std::pair<ModelParams, TrainReport> train(const CorpusSplit& split, const ModelContext& ctx,
                                          ModelParams init, const TrainConfig& cfg);

struct GradCheckResult {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t checked = 0;
  std::map<ParamGroup, double> group_relative_error;
};

struct GradCheckOptions {
  double step = 1e-4;
  /// |a - n| / max(|a|, |n|, floor); keeps entries whose true gradient is ~0
  /// from dividing round-off by round-off.
  double denominator_floor = 1e-3;
  /// Encoder-table rows the batch never touches that are also probed.
  std::size_t untouched_rows = 4;
};

/// Central finite differences against the analytic gradient, over every
/// trainable group. Encoder-table probing is restricted to the rows the batch
/// reads plus a few untouched rows (whose analytic gradient must be 0).
GradCheckResult grad_check(const ModelParams& p, std::span<const QueryRecord> batch,
                           const ModelContext& ctx, const LossWeights& w,
                           const GradCheckOptions& opt = {});

}  // namespace hiqc
