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

#include "hiqc/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "hiqc/error.hpp"
#include "hiqc/kernels.hpp"
#include "hiqc/random.hpp"

namespace hiqc {

namespace {

Matrix gaussian(std::size_t rows, std::size_t cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (double& x : m.flat()) x = stddev * standard_normal(rng);
  return m;
}

void add_into(Matrix& dst, const Matrix& src) {
  auto d = dst.flat();
  const auto s = src.flat();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void softmax_inplace(std::span<double> v) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double x : v) mx = std::max(mx, x);
  double sum = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (double& x : v) x /= sum;
}

}  // namespace

std::string_view to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::EncoderTable: return "encoder_table";
    case ParamGroup::LabelFeatures: return "label_features";
    case ParamGroup::GcnW1: return "gcn_w1";
    case ParamGroup::GcnW2: return "gcn_w2";
    case ParamGroup::AlignW: return "align_w";
    case ParamGroup::HeadW: return "head_w";
    case ParamGroup::HeadB: return "head_b";
  }
  return "?";
}

std::span<double> ModelParams::group(ParamGroup g) {
  switch (g) {
    case ParamGroup::EncoderTable: return encoder.table.flat();
    case ParamGroup::LabelFeatures: return label_features.flat();
    case ParamGroup::GcnW1: return gcn_w1.flat();
    case ParamGroup::GcnW2: return gcn_w2.flat();
    case ParamGroup::AlignW: return align_w.flat();
    case ParamGroup::HeadW: return head_w.flat();
    case ParamGroup::HeadB: return head_b;
  }
  return {};
}

std::span<const double> ModelParams::group(ParamGroup g) const {
  return const_cast<ModelParams*>(this)->group(g);
}

bool ModelParams::trains(ParamGroup g) const noexcept {
  switch (g) {
    case ParamGroup::LabelFeatures:
    case ParamGroup::GcnW1:
    case ParamGroup::GcnW2:
    case ParamGroup::AlignW:
      return label_hierarchy;
    default:
      return true;
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (auto g : kAllParamGroups) n += group(g).size();
  return n;
}

std::size_t ModelParams::trainable_parameter_count() const {
  std::size_t n = 0;
  for (auto g : kAllParamGroups) {
    if (trains(g)) n += group(g).size();
  }
  return n;
}

void ModelParams::validate(const Taxonomy& t) const {
  encoder.validate();
  const std::size_t v = t.size();
  const std::size_t dq = encoder.dim;
  require(label_features.rows() == v, "label_features rows must equal the label-graph size");
  require(gcn_w1.rows() == label_features.cols(), "gcn_w1 rows must equal label feature width");
  require(gcn_w2.rows() == gcn_w1.cols(), "gcn_w2 rows must equal gcn_w1 cols");
  require(align_w.rows() == dq && align_w.cols() == gcn_w2.cols(), "align_w must be d_q x d_g");
  require(head_w.rows() == dq + gcn_w2.cols(), "head_w rows must be d_q + d_g");
  require(head_w.cols() == t.head_size() && head_b.size() == t.head_size(),
          "head width must equal the number of non-root labels");
  if (taxonomy_hash != t.hash()) {
    throw Error(ErrorCode::TaxonomyMismatch, "parameters were built for a different taxonomy");
  }
  for (auto g : kAllParamGroups) {
    for (double x : group(g)) {
      if (!std::isfinite(x)) {
        throw Error(ErrorCode::NonFiniteLoss, std::string(to_string(g)) + " holds a non-finite value");
      }
    }
  }
}

bool operator==(const ModelParams& a, const ModelParams& b) {
  return a.encoder.table == b.encoder.table && a.encoder.hash_seed == b.encoder.hash_seed &&
         a.label_features == b.label_features && a.gcn_w1 == b.gcn_w1 && a.gcn_w2 == b.gcn_w2 &&
         a.align_w == b.align_w && a.head_w == b.head_w && a.head_b == b.head_b &&
         a.mask_root_attention == b.mask_root_attention && a.label_hierarchy == b.label_hierarchy &&
         a.taxonomy_hash == b.taxonomy_hash;
}

Gradients Gradients::zeros_like(const ModelParams& p) {
  Gradients g;
  g.encoder_table = Matrix(p.encoder.table.rows(), p.encoder.table.cols());
  g.label_features = Matrix(p.label_features.rows(), p.label_features.cols());
  g.gcn_w1 = Matrix(p.gcn_w1.rows(), p.gcn_w1.cols());
  g.gcn_w2 = Matrix(p.gcn_w2.rows(), p.gcn_w2.cols());
  g.align_w = Matrix(p.align_w.rows(), p.align_w.cols());
  g.head_w = Matrix(p.head_w.rows(), p.head_w.cols());
  g.head_b = Vector(p.head_b.size(), 0.0);
  return g;
}

std::span<double> Gradients::group(ParamGroup g) {
  switch (g) {
    case ParamGroup::EncoderTable: return encoder_table.flat();
    case ParamGroup::LabelFeatures: return label_features.flat();
    case ParamGroup::GcnW1: return gcn_w1.flat();
    case ParamGroup::GcnW2: return gcn_w2.flat();
    case ParamGroup::AlignW: return align_w.flat();
    case ParamGroup::HeadW: return head_w.flat();
    case ParamGroup::HeadB: return head_b;
  }
  return {};
}

std::span<const double> Gradients::group(ParamGroup g) const {
  return const_cast<Gradients*>(this)->group(g);
}

void Gradients::set_zero() {
  for (auto g : kAllParamGroups) {
    auto s = group(g);
    std::fill(s.begin(), s.end(), 0.0);
  }
}

ModelParams init_model(const Taxonomy& t, const ModelConfig& cfg, const EmbeddingStore* store) {
  const std::size_t dq = store ? store->dim() : cfg.query_dim;
  ModelParams p;
  p.encoder = EncoderParams::random(cfg.buckets, dq, cfg.seed, cfg.encoder_scale);
  p.mask_root_attention = cfg.mask_root_attention;
  p.label_hierarchy = cfg.label_hierarchy;
  p.taxonomy_hash = t.hash();

  const std::size_t v = t.size();
  p.label_features = Matrix(v, dq);
  for (std::size_t i = 1; i < v; ++i) {
    const auto e = encode(p.encoder, t.name(label_id(i)));
    std::copy(e.begin(), e.end(), p.label_features.row(i).begin());
  }
  auto root = p.label_features.row(0);
  for (std::size_t i = 1; i < v; ++i) {
    const auto r = p.label_features.row(i);
    for (std::size_t j = 0; j < dq; ++j) root[j] += r[j];
  }
  for (double& x : root) x /= static_cast<double>(v - 1);

  Rng rng(mix_seed(cfg.seed, 0x90DE1));
  auto weight = [&](std::size_t rows, std::size_t cols) {
    if (!cfg.identity_init) return gaussian(rows, cols, 1.0 / std::sqrt(static_cast<double>(rows)), rng);
    Matrix w = gaussian(rows, cols, 0.01, rng);
    for (std::size_t i = 0; i < std::min(rows, cols); ++i) w(i, i) += 1.0;
    return w;
  };
  p.gcn_w1 = weight(dq, cfg.hidden_dim);
  p.gcn_w2 = weight(cfg.hidden_dim, cfg.graph_dim);
  p.align_w = weight(dq, cfg.graph_dim);
  if (cfg.identity_init) {
    for (double& x : p.align_w.flat()) x *= cfg.align_gain;
  }
  p.head_w = gaussian(dq + cfg.graph_dim, t.head_size(), 0.01, rng);
  p.head_b = Vector(t.head_size(), 0.0);
  if (cfg.label_head_init > 0 && cfg.label_hierarchy) {
    const auto g = gcn_forward(build_label_graph(t), p);
    for (std::size_t k = 0; k < t.head_size(); ++k) {
      const auto row = g.row(k + 1);
      const double n = kernels::norm(row);
      if (n == 0) continue;
      for (std::size_t j = 0; j < row.size(); ++j) p.head_w(dq + j, k) += cfg.label_head_init * row[j] / n;
    }
  }
  return p;
}

GraphActivations gcn_forward_full(const LabelGraph& g, const ModelParams& p) {
  require(g.adjacency.rows() == p.label_features.rows() && g.adjacency.cols() == g.adjacency.rows(),
          "adjacency must be |V| x |V| matching label_features");
  GraphActivations a;
  a.propagated_features = kernels::gemm(g.adjacency, p.label_features);
  a.pre_relu = kernels::gemm(a.propagated_features, p.gcn_w1);
  a.hidden = a.pre_relu;
  for (double& x : a.hidden.flat()) x = std::max(0.0, x);
  a.propagated_hidden = kernels::gemm(g.adjacency, a.hidden);
  a.embedding = kernels::gemm(a.propagated_hidden, p.gcn_w2);
  return a;
}

Matrix gcn_forward(const LabelGraph& g, const ModelParams& p) {
  return gcn_forward_full(g, p).embedding;
}

Attention attention_fuse(std::span<const double> emb_q, const Matrix& emb_g, const ModelParams& p) {
  require(emb_q.size() == p.align_w.rows(), "query embedding width must equal align_w rows");
  require(emb_g.cols() == p.align_w.cols(), "graph embedding width must equal align_w cols");
  Attention out;
  Vector aligned(p.align_w.cols(), 0.0);
  for (std::size_t k = 0; k < emb_q.size(); ++k) {
    const auto w = p.align_w.row(k);
    for (std::size_t j = 0; j < aligned.size(); ++j) aligned[j] += emb_q[k] * w[j];
  }
  out.scores.resize(emb_g.rows());
  for (std::size_t v = 0; v < emb_g.rows(); ++v) out.scores[v] = kernels::dot(aligned, emb_g.row(v));
  if (p.mask_root_attention && !out.scores.empty()) {
    out.scores[0] = -std::numeric_limits<double>::infinity();
  }
  out.weights = out.scores;
  softmax_inplace(out.weights);
  out.fused.assign(emb_g.cols(), 0.0);
  for (std::size_t v = 0; v < emb_g.rows(); ++v) {
    const auto r = emb_g.row(v);
    for (std::size_t j = 0; j < r.size(); ++j) out.fused[j] += out.weights[v] * r[j];
  }
  return out;
}

Matrix embed_queries(const ModelContext& ctx, const ModelParams& p,
                     std::span<const QueryRecord> queries,
                     std::vector<std::vector<std::uint32_t>>* buckets) {
  const std::size_t dq = p.query_dim();
  Matrix e(queries.size(), dq);
  if (buckets) buckets->assign(queries.size(), {});
  const auto n = static_cast<long>(queries.size());
  if (ctx.store) {
    require(ctx.store->dim() == dq, "embedding store width must equal the model's query width");
    for (long i = 0; i < n; ++i) {
      const auto* v = ctx.store->find(queries[i].id);
      if (!v) throw Error(ErrorCode::MissingEmbedding, "no embedding for query '" + queries[i].id + "'");
      std::copy(v->begin(), v->end(), e.row(static_cast<std::size_t>(i)).begin());
    }
    return e;
  }
  std::vector<std::vector<std::uint32_t>> local(queries.size());
  // Feature extraction throws on blank text; surface the first failure after the loop.
  std::vector<std::string> errors(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    try {
      local[ui] = feature_buckets(p.encoder, queries[ui].text);
      const auto row = pool_rows(p.encoder.table, local[ui]);
      std::copy(row.begin(), row.end(), e.row(ui).begin());
    } catch (const std::exception& ex) {
      errors[ui] = "query '" + queries[ui].id + "': " + ex.what();
    }
  }
  for (const auto& msg : errors) {
    if (!msg.empty()) throw Error(ErrorCode::EmptyText, msg);
  }
  if (buckets) *buckets = std::move(local);
  return e;
}

BatchActivations forward_batch(const ModelContext& ctx, const ModelParams& p,
                               const GraphActivations& graph, std::span<const QueryRecord> queries) {
  BatchActivations a;
  const std::size_t b = queries.size();
  const std::size_t dq = p.query_dim();
  const std::size_t dg = p.graph_dim();
  a.query = embed_queries(ctx, p, queries, &a.buckets);

  if (p.label_hierarchy) {
    const Matrix& emb_g = graph.embedding;
    require(emb_g.cols() == dg, "graph embedding width must equal d_g");
    a.aligned = kernels::gemm(a.query, p.align_w);
    a.scores = kernels::gemm_nt(a.aligned, emb_g);
    a.attn = a.scores;
    for (std::size_t i = 0; i < b; ++i) {
      if (p.mask_root_attention) a.attn(i, 0) = -std::numeric_limits<double>::infinity();
      softmax_inplace(a.attn.row(i));
    }
    a.labels = kernels::gemm(a.attn, emb_g);
  } else {
    a.labels = Matrix(b, dg);
  }

  a.fused = Matrix(b, dq + dg);
  for (std::size_t i = 0; i < b; ++i) {
    auto f = a.fused.row(i);
    const auto q = a.query.row(i);
    const auto l = a.labels.row(i);
    std::copy(q.begin(), q.end(), f.begin());
    std::copy(l.begin(), l.end(), f.begin() + static_cast<std::ptrdiff_t>(dq));
  }
  a.logits = kernels::gemm(a.fused, p.head_w);
  a.probs = Matrix(b, p.num_outputs());
  for (std::size_t i = 0; i < b; ++i) {
    auto z = a.logits.row(i);
    auto pr = a.probs.row(i);
    for (std::size_t k = 0; k < z.size(); ++k) {
      z[k] += p.head_b[k];
      pr[k] = sigmoid(z[k]);
    }
  }
  return a;
}

Prediction make_prediction(const Taxonomy& t, std::span<const double> probs) {
  Prediction out;
  out.probs.assign(probs.begin(), probs.end());
  const auto kids = t.children();
  LabelId best = kids.front();
  double best_p = -1.0;
  for (LabelId c : kids) {
    const double v = probs[t.head_index(c)];
    if (v > best_p) {
      best_p = v;
      best = c;
    }
  }
  out.child = best;
  out.parent = t.parent_of(best);
  return out;
}

Prediction forward(const ModelContext& ctx, const ModelParams& p, const QueryRecord& q) {
  return predict(ctx, p, std::span(&q, 1)).front();
}

std::vector<Prediction> predict(const ModelContext& ctx, const ModelParams& p,
                                std::span<const QueryRecord> queries) {
  std::vector<Prediction> out;
  if (queries.empty()) return out;
  GraphActivations graph;
  if (p.label_hierarchy) graph = gcn_forward_full(ctx.graph, p);
  const auto act = forward_batch(ctx, p, graph, queries);
  out.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) out.push_back(make_prediction(ctx.taxonomy, act.probs.row(i)));
  return out;
}

Matrix batch_embed(const ModelContext& ctx, const ModelParams& p,
                   std::span<const QueryRecord> queries) {
  if (queries.empty()) return Matrix(0, p.fused_dim());
  GraphActivations graph;
  if (p.label_hierarchy) graph = gcn_forward_full(ctx.graph, p);
  return forward_batch(ctx, p, graph, queries).fused;
}

namespace {

void backward_graph(const LabelGraph& g, const ModelParams& p, const GraphActivations& a,
                    const Matrix& d_emb, Gradients& grads) {
  add_into(grads.gcn_w2, kernels::gemm_tn(a.propagated_hidden, d_emb));
  const Matrix d_prop_hidden = kernels::gemm_nt(d_emb, p.gcn_w2);
  Matrix d_pre = kernels::gemm_tn(g.adjacency, d_prop_hidden);
  auto pre = a.pre_relu.flat();
  auto dp = d_pre.flat();
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (pre[i] <= 0.0) dp[i] = 0.0;
  }
  add_into(grads.gcn_w1, kernels::gemm_tn(a.propagated_features, d_pre));
  const Matrix d_prop_features = kernels::gemm_nt(d_pre, p.gcn_w1);
  add_into(grads.label_features, kernels::gemm_tn(g.adjacency, d_prop_features));
}

}  // namespace

void backward_batch(const ModelContext& ctx, const ModelParams& p, const GraphActivations& graph,
                    const BatchActivations& act, const Matrix& dlogits, const Matrix& dfused,
                    Gradients& grads) {
  const std::size_t b = act.fused.rows();
  const std::size_t dq = p.query_dim();
  const std::size_t dg = p.graph_dim();
  require(dlogits.rows() == b && dlogits.cols() == p.num_outputs(), "dlogits shape");
  require(dfused.empty() || (dfused.rows() == b && dfused.cols() == dq + dg), "dfused shape");

  add_into(grads.head_w, kernels::gemm_tn(act.fused, dlogits));
  for (std::size_t i = 0; i < b; ++i) {
    const auto dz = dlogits.row(i);
    for (std::size_t k = 0; k < dz.size(); ++k) grads.head_b[k] += dz[k];
  }

  Matrix d_fused = kernels::gemm_nt(dlogits, p.head_w);
  if (!dfused.empty()) add_into(d_fused, dfused);

  Matrix d_query(b, dq);
  for (std::size_t i = 0; i < b; ++i) {
    const auto src = d_fused.row(i);
    std::copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(dq), d_query.row(i).begin());
  }

  if (p.label_hierarchy) {
    const Matrix& emb_g = graph.embedding;
    Matrix d_labels(b, dg);
    for (std::size_t i = 0; i < b; ++i) {
      const auto src = d_fused.row(i);
      std::copy(src.begin() + static_cast<std::ptrdiff_t>(dq), src.end(), d_labels.row(i).begin());
    }
    Matrix d_emb_g = kernels::gemm_tn(act.attn, d_labels);
    Matrix d_scores = kernels::gemm_nt(d_labels, emb_g);  // d attn for now
    for (std::size_t i = 0; i < b; ++i) {
      auto ds = d_scores.row(i);
      const auto a = act.attn.row(i);
      const double inner = kernels::dot(a, ds);
      for (std::size_t v = 0; v < ds.size(); ++v) ds[v] = a[v] * (ds[v] - inner);
    }
    add_into(d_emb_g, kernels::gemm_tn(d_scores, act.aligned));
    const Matrix d_aligned = kernels::gemm(d_scores, emb_g);
    add_into(grads.align_w, kernels::gemm_tn(act.query, d_aligned));
    add_into(d_query, kernels::gemm_nt(d_aligned, p.align_w));
    backward_graph(ctx.graph, p, graph, d_emb_g, grads);
  }

  // Sparse scatter into the encoder table, in query order.
  for (std::size_t i = 0; i < b; ++i) {
    const auto& buckets = act.buckets.empty() ? std::vector<std::uint32_t>{} : act.buckets[i];
    if (buckets.empty()) continue;
    const double inv = 1.0 / static_cast<double>(buckets.size());
    const auto dq_row = d_query.row(i);
    for (auto bk : buckets) {
      auto dst = grads.encoder_table.row(bk);
      for (std::size_t j = 0; j < dq; ++j) dst[j] += dq_row[j] * inv;
    }
  }
}

namespace {

constexpr char kMagic[8] = {'H', 'I', 'Q', 'C', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorCode::BadCheckpoint, "truncated checkpoint");
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::uint64_t>(out, m.rows());
  put<std::uint64_t>(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.flat().data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows > (1u << 26) || cols > (1u << 20)) throw Error(ErrorCode::BadCheckpoint, "implausible matrix shape");
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.flat().data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::BadCheckpoint, "truncated checkpoint");
  return m;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, p.taxonomy_hash);
  put<std::uint8_t>(out, p.mask_root_attention ? 1 : 0);
  put<std::uint8_t>(out, p.label_hierarchy ? 1 : 0);
  put<std::uint64_t>(out, p.encoder.buckets);
  put<std::uint64_t>(out, p.encoder.dim);
  put<std::uint64_t>(out, p.encoder.hash_seed);
  put<std::int32_t>(out, p.encoder.ngram_min);
  put<std::int32_t>(out, p.encoder.ngram_max);
  put_matrix(out, p.encoder.table);
  put_matrix(out, p.label_features);
  put_matrix(out, p.gcn_w1);
  put_matrix(out, p.gcn_w2);
  put_matrix(out, p.align_w);
  put_matrix(out, p.head_w);
  Matrix b(1, p.head_b.size());
  std::copy(p.head_b.begin(), p.head_b.end(), b.row(0).begin());
  put_matrix(out, b);
  if (!out) throw Error(ErrorCode::Io, "failed writing " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path, const Taxonomy& t) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw Error(ErrorCode::BadCheckpoint, path.string() + " is not a checkpoint");
  }
  if (get<std::uint32_t>(in) != kVersion) throw Error(ErrorCode::BadCheckpoint, "unsupported checkpoint version");
  ModelParams p;
  p.taxonomy_hash = get<std::uint64_t>(in);
  if (p.taxonomy_hash != t.hash()) {
    throw Error(ErrorCode::TaxonomyMismatch, "checkpoint was trained against a different taxonomy");
  }
  p.mask_root_attention = get<std::uint8_t>(in) != 0;
  p.label_hierarchy = get<std::uint8_t>(in) != 0;
  p.encoder.buckets = get<std::uint64_t>(in);
  p.encoder.dim = get<std::uint64_t>(in);
  p.encoder.hash_seed = get<std::uint64_t>(in);
  p.encoder.ngram_min = get<std::int32_t>(in);
  p.encoder.ngram_max = get<std::int32_t>(in);
  p.encoder.table = get_matrix(in);
  p.label_features = get_matrix(in);
  p.gcn_w1 = get_matrix(in);
  p.gcn_w2 = get_matrix(in);
  p.align_w = get_matrix(in);
  p.head_w = get_matrix(in);
  const Matrix b = get_matrix(in);
  p.head_b.assign(b.flat().begin(), b.flat().end());
  p.validate(t);
  return p;
}

}  // namespace hiqc
