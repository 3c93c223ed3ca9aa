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

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hiqc/model.hpp"
#include "hiqc/taxonomy.hpp"

namespace hiqc {

struct ClassScore {
  LabelId label{};
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct LevelScores {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;  // unweighted over every label at the level; zero-support labels score 0
  std::vector<ClassScore> per_class;
};

struct EvalResult {
  LevelScores child;
  LevelScores parent;  // parents derived from the predicted child
  std::size_t count = 0;

  nlohmann::json to_json(const Taxonomy& t) const;
  /// `level label tp fp fn precision recall f1` rows.
  std::string per_class_tsv(const Taxonomy& t) const;
};

/// Fills precision, recall and F1 from each row's tp/fp/fn and pools the
/// counts into Micro-F1; Macro-F1 is the plain mean over the rows.
LevelScores level_scores(std::vector<ClassScore> counts);

EvalResult micro_macro_f1(std::span<const LabelId> gold, std::span<const LabelId> predicted_child,
                          const Taxonomy& t);
EvalResult micro_macro_f1(std::span<const LabelId> gold, std::span<const Prediction> predictions,
                          const Taxonomy& t);

/// Predicts every labeled record and scores it.
EvalResult evaluate(const ModelContext& ctx, const ModelParams& p,
                    std::span<const QueryRecord> labeled);

}  // namespace hiqc
