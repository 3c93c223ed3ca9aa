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

#include "hiqc/matrix.hpp"
#include "hiqc/taxonomy.hpp"

namespace hiqc {

struct LossWeights {
  double lambda = 1.0;          // sibling term
  double w_intra = 0.9;         // intra vs inter inside the contrastive term
  double w_contrastive = 0.1;   // contrastive share of the total
  double tau = 0.5;             // contrastive temperature
  /// Negative pair in the numerator, positives in the denominator.
  bool literal_contrastive = false;

  void validate() const;
};

inline constexpr double kProbClamp = 1e-7;

/// Mean over the batch of
///   -sum_k [y log p + (1-y) log(1-p)] - lambda * sum_{j in siblings(c)} log p_j
/// with y = 1 on the gold child and its parent. `probs` rows are head outputs
/// (taxonomy head order), clamped to [1e-7, 1 - 1e-7]. When `dlogits` is given
/// it receives d(loss)/d(logit) assuming probs = sigmoid(logits).
double classification_loss(const Matrix& probs, std::span<const LabelId> gold, const Taxonomy& t,
                           const LossWeights& w, Matrix* dlogits = nullptr);

/// Positives share the anchor's child; negatives share its parent but not its
/// child. Per anchor, the loss is averaged over its in-batch positives; the
/// result is the mean over anchors with at least one positive and one
/// negative (0 if none). `demb` receives d(loss)/d(emb) when given.
double intra_class_loss(const Matrix& emb, std::span<const LabelId> children,
                        std::span<const LabelId> parents, double tau, Matrix* demb = nullptr,
                        bool literal = false);

/// Positives share the anchor's parent but not its child; negatives have a
/// different parent.
double inter_class_loss(const Matrix& emb, std::span<const LabelId> children,
                        std::span<const LabelId> parents, double tau, Matrix* demb = nullptr,
                        bool literal = false);

double combined_loss(double cls, double intra, double inter, const LossWeights& w);

}  // namespace hiqc
