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

// End-to-end runs (init -> train -> self-train -> test), the ablation table
// and the one-factor weight sweep.

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hiqc/eval.hpp"
#include "hiqc/model.hpp"
#include "hiqc/selftrain.hpp"
#include "hiqc/trainer.hpp"

namespace hiqc {

struct PipelineConfig {
  ModelConfig model;
  TrainConfig train;
  SamplerConfig sampler;
  /// false skips selftrain_loop entirely.
  bool self_training = true;

  /// Derives the model, training and sampler seeds from one base seed.
  void set_seed(std::uint64_t seed);
};

struct PipelineResult {
  ModelParams params;
  TrainReport train_report;
  SelfTrainResult selftrain;
  EvalResult validation;
  EvalResult test;  // falls back to validation when the split has no test records
};

PipelineResult run_pipeline(const CorpusSplit& split, const ModelContext& ctx,
                            const PipelineConfig& cfg,
                            const std::map<std::string, LabelId>* truth = nullptr);

enum class Variant { Full, NoLabelHierarchy, NoInstanceHierarchy, NoSelfTraining };
inline constexpr std::array kAllVariants{Variant::Full, Variant::NoLabelHierarchy,
                                         Variant::NoInstanceHierarchy, Variant::NoSelfTraining};
std::string_view to_string(Variant v);

/// full: unchanged; w/o label hierarchy: fusion bypass; w/o instance
/// hierarchy: w_contrastive = 0; w/o self-training: budget 0.
PipelineConfig apply_variant(PipelineConfig cfg, Variant v);

struct AblationRow {
  Variant variant = Variant::Full;
  EvalResult test;
  std::size_t trainable_parameters = 0;
};

std::vector<AblationRow> ablation_run(const CorpusSplit& split, const ModelContext& ctx,
                                      const PipelineConfig& cfg,
                                      std::span<const Variant> variants = kAllVariants,
                                      const std::map<std::string, LabelId>* truth = nullptr);
nlohmann::json ablation_json(std::span<const AblationRow> rows);

struct SweepAxis {
  std::string name;  // w_intra | w_contrastive | w_child
  std::vector<double> values;
};

/// The three weight axes and the baseline point every delta is taken against.
std::vector<SweepAxis> default_sweep_axes();
struct SweepPoint {
  double w_intra = 0.1;
  double w_contrastive = 0.01;
  double w_child = 0.1;
  auto operator<=>(const SweepPoint&) const = default;
};
PipelineConfig apply_point(PipelineConfig cfg, const SweepPoint& p);

struct SweepRow {
  std::string axis;  // "grid" for full-grid rows
  SweepPoint point;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double delta_micro = 0.0;  // percentage points vs the baseline point
  double delta_macro = 0.0;
  bool baseline = false;
};

/// One-factor-at-a-time (default) or the full Cartesian grid. Identical
/// points are run once.
std::vector<SweepRow> run_sweep(const CorpusSplit& split, const ModelContext& ctx,
                                const PipelineConfig& cfg, std::span<const SweepAxis> axes,
                                const SweepPoint& baseline = {}, bool full_grid = false);

/// `+0.62`-style signed deltas; the baseline prints as `0`.
std::string format_delta(double delta_points, bool baseline);
/// Parameter / Value / delta Micro-F1 / delta Macro-F1, tab separated.
std::string delta_table(std::span<const SweepRow> rows);

}  // namespace hiqc
