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

// Label-hierarchy-aware classifier: a two-layer GCN embeds the label graph,
// the query embedding attends over the label embeddings, and a per-label
// sigmoid head reads the concatenation [query, attended labels].

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "hiqc/corpus.hpp"
#include "hiqc/encoder.hpp"
#include "hiqc/matrix.hpp"
#include "hiqc/taxonomy.hpp"

namespace hiqc {

struct ModelConfig {
  std::size_t buckets = 8192;
  std::size_t query_dim = 64;   // ignored when an EmbeddingStore supplies query vectors
  std::size_t hidden_dim = 64;  // GCN layer 1 width
  std::size_t graph_dim = 64;   // GCN layer 2 width
  double encoder_scale = 0.1;
  bool mask_root_attention = false;
  /// false removes the GCN/attention branch: emb_f = [emb_q, 0].
  bool label_hierarchy = true;
  /// GCN and alignment weights start at the identity (plus small noise)
  /// instead of N(0, 1/fan_in).
  bool identity_init = false;
  /// Multiplies the identity-initialized align_w; larger values sharpen the
  /// initial attention.
  double align_gain = 1.0;
  /// Scale of the label-branch head rows seeded from the initial graph
  /// embedding of each output label; 0 keeps them random.
  double label_head_init = 0.0;
  std::uint64_t seed = 0;
};

enum class ParamGroup { EncoderTable, LabelFeatures, GcnW1, GcnW2, AlignW, HeadW, HeadB };
inline constexpr std::array kAllParamGroups{
    ParamGroup::EncoderTable, ParamGroup::LabelFeatures, ParamGroup::GcnW1, ParamGroup::GcnW2,
    ParamGroup::AlignW,       ParamGroup::HeadW,         ParamGroup::HeadB};
std::string_view to_string(ParamGroup g);

struct ModelParams {
  EncoderParams encoder;
  Matrix label_features;  // |V| x d_l, node order
  Matrix gcn_w1;          // d_l x d_h
  Matrix gcn_w2;          // d_h x d_g
  Matrix align_w;         // d_q x d_g
  Matrix head_w;          // (d_q + d_g) x (|V| - 1)
  Vector head_b;          // |V| - 1
  bool mask_root_attention = false;
  bool label_hierarchy = true;
  std::uint64_t taxonomy_hash = 0;
  /// Bumped on every parameter update; keys cached graph embeddings.
  std::uint64_t revision = 0;

  std::size_t query_dim() const noexcept { return align_w.rows(); }
  std::size_t graph_dim() const noexcept { return gcn_w2.cols(); }
  std::size_t fused_dim() const noexcept { return head_w.rows(); }
  std::size_t num_outputs() const noexcept { return head_b.size(); }

  std::span<double> group(ParamGroup g);
  std::span<const double> group(ParamGroup g) const;
  /// Groups that receive gradient under the current configuration.
  bool trains(ParamGroup g) const noexcept;
  std::size_t parameter_count() const;
  std::size_t trainable_parameter_count() const;

  void validate(const Taxonomy& t) const;
  friend bool operator==(const ModelParams& a, const ModelParams& b);
};

/// Same shapes as ModelParams' trainable tensors.
struct Gradients {
  Matrix encoder_table;
  Matrix label_features;
  Matrix gcn_w1;
  Matrix gcn_w2;
  Matrix align_w;
  Matrix head_w;
  Vector head_b;

  static Gradients zeros_like(const ModelParams& p);
  std::span<double> group(ParamGroup g);
  std::span<const double> group(ParamGroup g) const;
  void set_zero();
};

/// Builds a fresh model: random encoder table, label features from encoding
/// each label's text (root row = mean of the other rows), scaled Gaussian
/// weights elsewhere.
ModelParams init_model(const Taxonomy& t, const ModelConfig& cfg,
                       const EmbeddingStore* store = nullptr);

/// Everything the forward pass reads besides the parameters.
struct ModelContext {
  const Taxonomy& taxonomy;
  const LabelGraph& graph;
  const EmbeddingStore* store = nullptr;
};

struct GraphActivations {
  Matrix propagated_features;  // A X
  Matrix pre_relu;             // A X W1
  Matrix hidden;               // relu(A X W1)
  Matrix propagated_hidden;    // A H1
  Matrix embedding;            // emb_G = A H1 W2
};

GraphActivations gcn_forward_full(const LabelGraph& g, const ModelParams& p);
/// emb_G, |V| x d_g.
Matrix gcn_forward(const LabelGraph& g, const ModelParams& p);

struct Attention {
  Vector fused;   // emb_l, d_g
  Vector weights; // softmax over |V|
  Vector scores;  // pre-softmax logits
};

Attention attention_fuse(std::span<const double> emb_q, const Matrix& emb_g, const ModelParams& p);

/// Batched activations; row i belongs to query i.
struct BatchActivations {
  std::vector<std::vector<std::uint32_t>> buckets;  // empty when the row came from a store
  Matrix query;    // E, B x d_q
  Matrix aligned;  // E W, B x d_g
  Matrix scores;   // B x |V|
  Matrix attn;     // B x |V|
  Matrix labels;   // emb_l rows, B x d_g
  Matrix fused;    // emb_f rows, B x (d_q + d_g)
  Matrix logits;   // B x outputs
  Matrix probs;    // sigmoid(logits)
};

/// Query embedding rows: store lookup when the context has a store, encoder otherwise.
Matrix embed_queries(const ModelContext& ctx, const ModelParams& p,
                     std::span<const QueryRecord> queries,
                     std::vector<std::vector<std::uint32_t>>* buckets = nullptr);

BatchActivations forward_batch(const ModelContext& ctx, const ModelParams& p,
                               const GraphActivations& graph, std::span<const QueryRecord> queries);

struct Prediction {
  Vector probs;  // head outputs, taxonomy head order (root excluded)
  LabelId child{};
  LabelId parent{};
};

/// argmax over child outputs (lowest id on ties); parent from the taxonomy.
Prediction make_prediction(const Taxonomy& t, std::span<const double> probs);

Prediction forward(const ModelContext& ctx, const ModelParams& p, const QueryRecord& q);
std::vector<Prediction> predict(const ModelContext& ctx, const ModelParams& p,
                                std::span<const QueryRecord> queries);
/// emb_f rows, identical to the fused rows forward() computes.
Matrix batch_embed(const ModelContext& ctx, const ModelParams& p,
                   std::span<const QueryRecord> queries);

/// Accumulates parameter gradients given upstream d(loss)/d(logits) and an
/// extra d(loss)/d(emb_f) (e.g. from the contrastive losses; may be empty).
void backward_batch(const ModelContext& ctx, const ModelParams& p, const GraphActivations& graph,
                    const BatchActivations& act, const Matrix& dlogits, const Matrix& dfused,
                    Gradients& grads);

/// Versioned binary dump of every ModelParams field plus the taxonomy hash.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& p);
/// Rejects a checkpoint whose taxonomy hash differs from `t.hash()`.
ModelParams load_checkpoint(const std::filesystem::path& path, const Taxonomy& t);

}  // namespace hiqc
