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

#include <cmath>
#include <fstream>
#include <set>

#include "doctest.h"
#include "test_util.hpp"
#include "toy_model.hpp"

#include "hiqc/model.hpp"

using namespace hiqc;

namespace {

// Straight-line forward pass over nested loops, independent of the kernels.
std::vector<double> oracle_probs(const Taxonomy& t, const ModelParams& p, const std::string& text) {
  const auto g = build_label_graph(t);
  const auto& a = g.adjacency;
  const std::size_t v = t.size(), dq = p.query_dim(), dh = p.gcn_w1.cols(), dg = p.graph_dim();
  auto mul = [](const Matrix& x, const Matrix& y) {
    Matrix z(x.rows(), y.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < y.cols(); ++j)
        for (std::size_t k = 0; k < x.cols(); ++k) z(i, j) += x(i, k) * y(k, j);
    return z;
  };
  Matrix h = mul(mul(a, p.label_features), p.gcn_w1);
  for (double& x : h.flat()) x = x > 0 ? x : 0;
  const Matrix emb_g = mul(mul(a, h), p.gcn_w2);
  (void)dh;

  const auto e = encode(p.encoder, text);
  std::vector<double> aligned(dg, 0.0), score(v, 0.0), attn(v), lab(dg, 0.0);
  for (std::size_t j = 0; j < dg; ++j)
    for (std::size_t k = 0; k < dq; ++k) aligned[j] += e[k] * p.align_w(k, j);
  double mx = -1e300;
  for (std::size_t u = 0; u < v; ++u) {
    for (std::size_t j = 0; j < dg; ++j) score[u] += aligned[j] * emb_g(u, j);
    mx = std::max(mx, score[u]);
  }
  double z = 0;
  for (std::size_t u = 0; u < v; ++u) z += attn[u] = std::exp(score[u] - mx);
  for (std::size_t u = 0; u < v; ++u)
    for (std::size_t j = 0; j < dg; ++j) lab[j] += attn[u] / z * emb_g(u, j);

  std::vector<double> fused(e.begin(), e.end());
  fused.insert(fused.end(), lab.begin(), lab.end());
  std::vector<double> probs(p.num_outputs());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    double s = p.head_b[k];
    for (std::size_t j = 0; j < fused.size(); ++j) s += fused[j] * p.head_w(j, k);
    probs[k] = 1 / (1 + std::exp(-s));
  }
  return probs;
}

}  // namespace

TEST_CASE("gcn: identity on a single self-looped node") {
  ModelParams p;
  p.label_features = Matrix(1, 2);
  p.label_features(0, 0) = 0.7;
  p.label_features(0, 1) = 2.0;
  p.gcn_w1 = Matrix::identity(2);
  p.gcn_w2 = Matrix::identity(2);
  LabelGraph g{{label_id(0)}, Matrix(1, 1, 1.0)};
  CHECK(gcn_forward(g, p) == p.label_features);

  p.label_features.set_zero();
  CHECK(gcn_forward(g, p) == Matrix(1, 2));
}

TEST_CASE("gcn: 3-node chain by hand") {
  const auto t = Taxonomy::parse("p\n  c\n");
  const auto g = build_label_graph(t);
  ModelParams p;
  p.label_features = Matrix(3, 1);
  p.label_features(0, 0) = 1.0;   // root
  p.label_features(1, 0) = -2.0;  // p
  p.label_features(2, 0) = 3.0;   // c
  p.gcn_w1 = Matrix(1, 1, 2.0);
  p.gcn_w2 = Matrix(1, 1, -1.0);
  // A = [[1/2, 1/sqrt6, 0], [1/sqrt6, 1/3, 1/sqrt6], [0, 1/sqrt6, 1/2]]
  const double s = 1 / std::sqrt(6.0);
  const double ax[3] = {0.5 * 1 + s * -2, s * 1 + (-2.0) / 3 + s * 3, s * -2 + 0.5 * 3};
  double h[3];
  for (int i = 0; i < 3; ++i) h[i] = std::max(0.0, 2 * ax[i]);
  const double out[3] = {-(0.5 * h[0] + s * h[1]), -(s * h[0] + h[1] / 3 + s * h[2]),
                         -(s * h[1] + 0.5 * h[2])};
  const auto got = gcn_forward(g, p);
  for (int i = 0; i < 3; ++i) CHECK(got(i, 0) == doctest::Approx(out[i]).epsilon(1e-12));
}

TEST_CASE("attention hand case") {
  ModelParams p;
  p.align_w = Matrix::identity(2);
  Matrix emb_g(2, 2);
  emb_g(0, 0) = 1;
  emb_g(1, 1) = 1;
  const std::vector<double> q{1, 0};
  const auto a = attention_fuse(q, emb_g, p);
  CHECK(a.weights[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(a.weights[1] == doctest::Approx(0.2689).epsilon(1e-4));
  CHECK(a.fused[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK(a.fused[1] == doctest::Approx(0.2689).epsilon(1e-4));

  Matrix same(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    same(i, 0) = 0.25;
    same(i, 1) = -4;
  }
  const std::vector<double> q2{3, -1};
  const auto b = attention_fuse(q2, same, p);
  CHECK(b.fused[0] == doctest::Approx(0.25));
  CHECK(b.fused[1] == doctest::Approx(-4));

  p.mask_root_attention = true;
  const auto m = attention_fuse(q, emb_g, p);
  CHECK(m.weights[0] == 0.0);
  CHECK(m.weights[1] == 1.0);
}

TEST_CASE("zero head gives probabilities of exactly one half") {
  const auto& t = test::toy_taxonomy();
  auto p = init_model(t, test::toy_config());
  p.head_w.set_zero();
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  for (double x : forward(ctx, p, {"q", "sharp knife", std::nullopt}).probs) CHECK(x == 0.5);
}

TEST_CASE("parent comes from the predicted child") {
  const auto& t = test::toy_taxonomy();
  std::vector<double> probs(t.head_size(), 0.1);
  const auto c2 = t.id_of("seed tray");
  probs[t.head_index(c2)] = 0.6;
  probs[t.head_index(t.id_of("kitchen"))] = 0.99;
  const auto pr = make_prediction(t, probs);
  CHECK(pr.child == c2);
  CHECK(pr.parent == t.id_of("garden"));
}

TEST_CASE("forward matches an independent reimplementation") {
  const auto& t = test::toy_taxonomy();
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = test::toy_params(t, seed);
    for (const auto& q : test::toy_queries(t, 6, seed)) {
      const auto got = forward(ctx, p, q).probs;
      const auto want = oracle_probs(t, p, q.text);
      for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - want[k]) < 1e-10);
    }
  }
}

TEST_CASE("attention is a distribution and parents stay consistent") {
  const auto& t = test::toy_taxonomy();
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto p = test::toy_params(t, seed);
    const auto queries = test::toy_queries(t, 5, seed + 100);
    const auto graph = gcn_forward_full(g, p);
    const auto act = forward_batch(ctx, p, graph, queries);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      double s = 0;
      for (double w : act.attn.row(i)) {
        CHECK(w > 0);
        s += w;
      }
      CHECK(std::abs(s - 1) < 1e-9);
    }
    for (const auto& pr : predict(ctx, p, queries)) CHECK(pr.parent == t.parent_of(pr.child));
  }
}

TEST_CASE("batch_embed agrees with forward and preserves rows") {
  const auto& t = test::toy_taxonomy();
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  const auto p = test::toy_params(t);
  auto queries = test::toy_queries(t, 4, 9);
  queries.push_back(queries[1]);
  const auto e = batch_embed(ctx, p, queries);
  REQUIRE(e.rows() == 5);
  const auto graph = gcn_forward_full(g, p);
  const auto single = forward_batch(ctx, p, graph, std::span(&queries[2], 1)).fused;
  for (std::size_t j = 0; j < e.cols(); ++j) CHECK(e(2, j) == single(0, j));
  for (std::size_t j = 0; j < e.cols(); ++j) CHECK(e(1, j) == e(4, j));
}

TEST_CASE("jacobian of probs matches finite differences for every group") {
  const auto& t = test::toy_taxonomy();
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  auto p = test::toy_params(t, 3);
  const auto queries = test::toy_queries(t, 3, 5);
  Rng rng(21);
  Matrix c(queries.size(), p.num_outputs());
  for (double& x : c.flat()) x = standard_normal(rng);

  auto objective = [&] {
    const auto graph = gcn_forward_full(g, p);
    const auto act = forward_batch(ctx, p, graph, queries);
    double s = 0;
    for (std::size_t i = 0; i < act.probs.size(); ++i) s += c.flat()[i] * act.probs.flat()[i];
    return s;
  };

  const auto graph = gcn_forward_full(g, p);
  const auto act = forward_batch(ctx, p, graph, queries);
  Matrix dlogits(queries.size(), p.num_outputs());
  for (std::size_t i = 0; i < dlogits.size(); ++i) {
    const double pr = act.probs.flat()[i];
    dlogits.flat()[i] = c.flat()[i] * pr * (1 - pr);
  }
  auto grads = Gradients::zeros_like(p);
  backward_batch(ctx, p, graph, act, dlogits, Matrix(), grads);

  std::set<std::size_t> rows;
  for (const auto& b : act.buckets) rows.insert(b.begin(), b.end());
  const double h = 1e-4;
  for (auto group : kAllParamGroups) {
    auto params = p.group(group);
    const auto analytic = grads.group(group);
    double worst = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (group == ParamGroup::EncoderTable && !rows.count(i / p.encoder.dim)) continue;
      const double keep = params[i];
      params[i] = keep + h;
      const double up = objective();
      params[i] = keep - h;
      const double down = objective();
      params[i] = keep;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    CHECK_MESSAGE(worst < 1e-4, to_string(group));
  }
}

TEST_CASE("fusion bypass drops the graph branch from training") {
  const auto& t = test::toy_taxonomy();
  auto cfg = test::toy_config();
  const auto full = init_model(t, cfg);
  cfg.label_hierarchy = false;
  const auto bare = init_model(t, cfg);
  const std::size_t graph_params = full.label_features.size() + full.gcn_w1.size() +
                                   full.gcn_w2.size() + full.align_w.size();
  CHECK(full.parameter_count() == bare.parameter_count());
  CHECK(full.trainable_parameter_count() - bare.trainable_parameter_count() == graph_params);

  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g};
  const auto e = batch_embed(ctx, bare, test::toy_queries(t, 2, 1));
  for (std::size_t j = bare.query_dim(); j < e.cols(); ++j) CHECK(e(0, j) == 0.0);
}

TEST_CASE("checkpoint round trip and taxonomy binding") {
  const auto& t = test::toy_taxonomy();
  const auto p = test::toy_params(t, 4);
  const auto dir = test::scratch_dir("model_ckpt");
  save_checkpoint(dir / "m.bin", p);
  CHECK(load_checkpoint(dir / "m.bin", t) == p);
  const auto other = Taxonomy::from_groups({{"x", {"y"}}});
  CHECK_ERROR_CODE(load_checkpoint(dir / "m.bin", other), ErrorCode::TaxonomyMismatch);
  {
    std::ofstream junk(dir / "junk.bin");
    junk << "not a checkpoint";
  }
  CHECK_ERROR_CODE(load_checkpoint(dir / "junk.bin", t), ErrorCode::BadCheckpoint);
}

TEST_CASE("embedding store supplies query vectors") {
  const auto& t = test::toy_taxonomy();
  const auto store = EmbeddingStore::parse("1 8\nq1 1 0 0 0 0 0 0 0\n");
  auto cfg = test::toy_config();
  const auto p = init_model(t, cfg, &store);
  CHECK(p.query_dim() == 8);
  const auto g = build_label_graph(t);
  const ModelContext ctx{t, g, &store};
  const std::vector<QueryRecord> ok{{"q1", "anything", std::nullopt}};
  const auto e = embed_queries(ctx, p, ok);
  CHECK(e(0, 0) == 1.0);
  const std::vector<QueryRecord> missing{{"q2", "anything", std::nullopt}};
  CHECK_ERROR_CODE(embed_queries(ctx, p, missing), ErrorCode::MissingEmbedding);
}
