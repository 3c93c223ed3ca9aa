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

// Neighborhood-aware self-training: score each unlabeled prediction by how
// well it agrees with the labels of its nearest labeled queries, sample a
// budget of low-divergence candidates, add them with their predicted labels
// and retrain.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hiqc/corpus.hpp"
#include "hiqc/model.hpp"
#include "hiqc/neighbor_index.hpp"
#include "hiqc/trainer.hpp"

namespace hiqc {

struct SamplerConfig {
  std::size_t k_neighbors = 10;
  double w_child = 0.3;
  double epsilon = 1e-3;
  double temperature = 1.0;
  /// Fixed per-round count; when unset, budget_fraction of the initial pool.
  std::optional<std::size_t> budget_count;
  double budget_fraction = 0.05;
  std::size_t max_rounds = 10;
  std::size_t patience_rounds = 2;
  IndexKind index_kind = IndexKind::ExactCosine;
  HnswParams hnsw;
  /// Sample proportional to Dist instead of exp(-Dist / temperature).
  bool literal_prob_direction = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t budget_for(std::size_t pool_size) const;
};

/// sum p_i ln(p_i / q_i), with 0 ln 0 = 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// 1 - eps on `hot`, eps / (n - 1) elsewhere; [1] when n == 1.
Vector smoothed_onehot(std::size_t n, std::size_t hot, double eps);

/// Sigmoid outputs of the child (parent) heads renormalized to sum to 1,
/// ordered like Taxonomy::children() (leaf_parents()).
Vector child_distribution(const Prediction& pred, const Taxonomy& t);
Vector parent_distribution(const Prediction& pred, const Taxonomy& t);

/// Dist = w_child * child_part + (1 - w_child) * parent_part, each part the
/// mean KL from the neighbors' smoothed labels to the prediction plus the
/// mean KL from the neighbors' smoothed labels to their own average.
double neighborhood_score(const Prediction& pred, std::span<const LabelId> neighbor_children,
                          const Taxonomy& t, const SamplerConfig& cfg);

struct ScoredCandidate {
  std::string id;
  double dist = 0.0;
};

/// Weighted draws without replacement, in draw order. Candidates are taken
/// in ascending id order, so the result depends only on the set and the seed.
std::vector<std::string> sample_candidates(std::span<const ScoredCandidate> scored,
                                           std::size_t budget, std::uint64_t seed,
                                           const SamplerConfig& cfg);

/// Index over labeled records keyed by fused embeddings (cosine kinds).
NeighborIndex build_index(std::span<const QueryRecord> labeled, Matrix keys,
                          const SamplerConfig& cfg);
/// Index over labeled records keyed by strings (levenshtein).
NeighborIndex build_index(std::span<const QueryRecord> labeled, std::vector<std::string> keys,
                          const SamplerConfig& cfg);

struct SampledQuery {
  std::string id;
  LabelId child{};
  LabelId parent{};
  double dist = 0.0;
};

struct RoundReport {
  std::size_t round = 0;
  std::vector<SampledQuery> sampled;
  double val_micro_f1 = 0.0;
  double val_macro_f1 = 0.0;
  std::size_t labeled_size = 0;
  std::size_t pool_size = 0;  // after sampling
  std::optional<double> pseudo_label_accuracy;

  nlohmann::json to_json(const Taxonomy& t) const;
};

void write_round_reports(std::ostream& out, std::span<const RoundReport> rounds, const Taxonomy& t);
/// `round id pseudo_child pseudo_parent dist`, tab separated.
void write_sampled_ledger(std::ostream& out, std::span<const RoundReport> rounds,
                          const Taxonomy& t);

struct SelfTrainResult {
  ModelParams params;  // best validation Macro-F1 seen, including the initial params
  std::vector<RoundReport> rounds;
  std::size_t best_round = 0;
};

/// Scores every pool query against the current labeled set. Output follows
/// the pool order.
std::vector<ScoredCandidate> score_pool(const ModelContext& ctx, const ModelParams& p,
                                        std::span<const QueryRecord> labeled,
                                        std::span<const QueryRecord> pool,
                                        const SamplerConfig& cfg,
                                        std::vector<Prediction>* predictions = nullptr);

/// Rounds of score / sample / augment / retrain. Round r retrains from the
/// current params with seed mix_seed(train_cfg.seed, r). Stops after
/// max_rounds, when the pool is exhausted, or when validation Macro-F1 has
/// not improved for patience_rounds rounds. `truth` (withheld labels) only
/// feeds the pseudo-label accuracy column.
SelfTrainResult selftrain_loop(const CorpusSplit& split, const ModelContext& ctx, ModelParams init,
                               const TrainConfig& train_cfg, const SamplerConfig& cfg,
                               const std::map<std::string, LabelId>* truth = nullptr);

}  // namespace hiqc
