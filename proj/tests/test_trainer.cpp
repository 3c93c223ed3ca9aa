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
#include <set>

#include "doctest.h"
#include "test_util.hpp"
#include "toy_model.hpp"

#include "hiqc/eval.hpp"
#include "hiqc/trainer.hpp"

using namespace hiqc;

namespace {

struct Toy {
  const Taxonomy& t = test::toy_taxonomy();
  LabelGraph g = build_label_graph(t);
  ModelContext ctx{t, g};
};

// Minimal per-label BCE trainer: own loss, own dlogits, own Adam arithmetic.
std::vector<double> oracle_bce_losses(const ModelContext& ctx, ModelParams p,
                                      const std::vector<QueryRecord>& train, const TrainConfig& cfg) {
  const auto& t = ctx.taxonomy;
  std::map<ParamGroup, std::pair<std::vector<double>, std::vector<double>>> moments;
  for (auto g : kAllParamGroups) {
    moments[g] = {std::vector<double>(p.group(g).size(), 0.0), std::vector<double>(p.group(g).size(), 0.0)};
  }
  long step = 0;
  std::vector<double> epoch_losses;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, epoch));
    const auto plan = plan_epoch(train, t, cfg.batch_size, rng);
    double sum = 0;
    for (const auto& members : plan) {
      std::vector<QueryRecord> batch;
      for (auto i : members) batch.push_back(train[i]);
      const auto graph = gcn_forward_full(ctx.graph, p);
      const auto act = forward_batch(ctx, p, graph, batch);
      Matrix d(batch.size(), p.num_outputs());
      double loss = 0;
      const double inv_b = 1.0 / static_cast<double>(batch.size());
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const LabelId gold = *batch[i].child;
        for (std::size_t k = 0; k < p.num_outputs(); ++k) {
          const LabelId label = label_id(k + 1);
          const double y = (label == gold || label == t.parent_of(gold)) ? 1.0 : 0.0;
          const double pr = act.probs(i, k);
          loss -= y * std::log(pr) + (1 - y) * std::log(1 - pr);
          d(i, k) = (pr - y) * inv_b;
        }
      }
      sum += loss * inv_b;
      auto grads = Gradients::zeros_like(p);
      backward_batch(ctx, p, graph, act, d, Matrix(), grads);
      ++step;
      for (auto g : kAllParamGroups) {
        auto w = p.group(g);
        const auto gr = grads.group(g);
        auto& [m, v] = moments[g];
        for (std::size_t i = 0; i < w.size(); ++i) {
          m[i] = cfg.adam_beta1 * m[i] + (1 - cfg.adam_beta1) * gr[i];
          v[i] = cfg.adam_beta2 * v[i] + (1 - cfg.adam_beta2) * gr[i] * gr[i];
          const double mh = m[i] / (1 - std::pow(cfg.adam_beta1, static_cast<double>(step)));
          const double vh = v[i] / (1 - std::pow(cfg.adam_beta2, static_cast<double>(step)));
          w[i] -= cfg.learning_rate * mh / (std::sqrt(vh) + cfg.adam_eps);
        }
      }
    }
    epoch_losses.push_back(sum / static_cast<double>(plan.size()));
  }
  return epoch_losses;
}

CorpusSplit toy_split(const Taxonomy& t, std::size_t n, std::uint64_t seed) {
  CorpusSplit s;
  s.train = test::toy_queries(t, n, seed);
  s.validation = test::toy_queries(t, 8, seed + 1000);
  for (auto& r : s.validation) r.id = "v" + r.id;
  return s;
}

}  // namespace

TEST_CASE("zero learning rate returns the initial params") {
  Toy toy;
  const auto init = test::toy_params(toy.t);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.learning_rate = 0;
  cfg.batch_size = 4;
  const auto [params, report] = train(toy_split(toy.t, 12, 1), toy.ctx, init, cfg);
  CHECK(params == init);
  CHECK(report.epochs.size() == 1);
}

TEST_CASE("same seed, same report") {
  Toy toy;
  const auto split = toy_split(toy.t, 20, 2);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 6;
  cfg.learning_rate = 0.01;
  const auto a = train(split, toy.ctx, test::toy_params(toy.t), cfg);
  const auto b = train(split, toy.ctx, test::toy_params(toy.t), cfg);
  CHECK(a.second.to_json().dump() == b.second.to_json().dump());
  CHECK(a.first == b.first);
}

TEST_CASE("adam: zero gradient leaves params, decays moments") {
  Toy toy;
  auto p = test::toy_params(toy.t);
  const auto before = p;
  auto state = AdamState::zeros_like(p);
  state.m.head_b.assign(state.m.head_b.size(), 0.0);
  TrainConfig cfg;
  adam_step(p, Gradients::zeros_like(p), state, cfg);
  CHECK(p == before);

  state.m.head_b[0] = 1.0;
  state.v.head_b[0] = 1.0;
  adam_step(p, Gradients::zeros_like(p), state, cfg);
  CHECK(state.m.head_b[0] == doctest::Approx(cfg.adam_beta1));
  CHECK(state.v.head_b[0] == doctest::Approx(cfg.adam_beta2));
}

TEST_CASE("every batch carries a sibling pair") {
  Toy toy;
  const auto train_set = test::toy_queries(toy.t, 50, 3);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const auto plan = plan_epoch(train_set, toy.t, 5, rng);
    std::set<std::size_t> covered;
    for (const auto& batch : plan) {
      CHECK(batch.size() == 5);
      bool pair = false;
      for (auto i : batch) {
        covered.insert(i);
        for (auto j : batch) {
          const auto ci = *train_set[i].child, cj = *train_set[j].child;
          pair |= ci != cj && toy.t.parent_of(ci) == toy.t.parent_of(cj);
        }
      }
      CHECK(pair);
    }
    CHECK(covered.size() >= 30);
  }
}

TEST_CASE("grad_check on the toy model") {
  Toy toy;
  const auto p = test::toy_params(toy.t, 5);
  CHECK(p.trainable_parameter_count() - p.encoder.table.size() < 2000);
  LossWeights w;
  w.w_contrastive = 0.5;
  w.w_intra = 0.6;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto batch = test::toy_queries(toy.t, 6, seed + 40);
    const auto r = grad_check(p, batch, toy.ctx, w);
    CHECK(r.checked > 0);
    CHECK(r.max_relative_error < 1e-4);
  }
}

TEST_CASE("grad_check with the contrastive branch off") {
  Toy toy;
  const auto p = test::toy_params(toy.t, 6);
  LossWeights w;
  w.w_contrastive = 0;
  const auto r = grad_check(p, test::toy_queries(toy.t, 6, 11), toy.ctx, w);
  CHECK(r.max_relative_error < 1e-4);
}

TEST_CASE("central differences are second order") {
  Toy toy;
  const auto p = test::toy_params(toy.t, 7);
  const auto batch = test::toy_queries(toy.t, 6, 12);
  LossWeights w;
  GradCheckOptions small, big;
  small.step = 1e-3;
  big.step = 2e-3;
  const double e1 = grad_check(p, batch, toy.ctx, w, small).max_absolute_error;
  const double e2 = grad_check(p, batch, toy.ctx, w, big).max_absolute_error;
  CHECK(e2 / e1 > 3.0);
  CHECK(e2 / e1 < 5.0);
}

TEST_CASE("with lambda 0 and no contrastive term, training is plain BCE") {
  Toy toy;
  const auto split = toy_split(toy.t, 24, 4);
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 6;
  cfg.learning_rate = 0.02;
  cfg.early_stop_patience = 100;
  cfg.weights.lambda = 0;
  cfg.weights.w_contrastive = 0;
  const auto init = test::toy_params(toy.t, 8);
  const auto [params, report] = train(split, toy.ctx, init, cfg);
  const auto oracle = oracle_bce_losses(toy.ctx, init, split.train, cfg);
  REQUIRE(report.epochs.size() == oracle.size());
  for (std::size_t e = 0; e < oracle.size(); ++e) {
    CHECK(std::abs(report.epochs[e].classification - oracle[e]) < 1e-9);
  }
}

TEST_CASE("updates stay finite") {
  Toy toy;
  auto p = test::toy_params(toy.t, 9);
  auto state = AdamState::zeros_like(p);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  for (std::uint64_t b = 0; b < 100; ++b) {
    auto grads = Gradients::zeros_like(p);
    const auto loss = batch_loss(toy.ctx, p, test::toy_queries(toy.t, 4, b), cfg.weights, &grads);
    CHECK(std::isfinite(loss.total));
    adam_step(p, grads, state, cfg);
  }
  for (auto g : kAllParamGroups)
    for (double x : p.group(g)) REQUIRE(std::isfinite(x));
}

TEST_CASE("separable two-class corpus is learned") {
  SyntheticSpec spec;
  spec.parents = 1;
  spec.children_per_parent = 2;
  spec.queries_per_child = 40;
  spec.imbalance = 1.0;
  spec.typo_rate = 0.0;
  spec.unlabeled_fraction = 0.0;
  const auto corpus = gen_synthetic(spec);
  const auto g = build_label_graph(corpus.taxonomy);
  const ModelContext ctx{corpus.taxonomy, g};
  CorpusSplit split;
  split.train = corpus.records;
  ModelConfig mc;
  mc.query_dim = 16;
  mc.hidden_dim = 16;
  mc.graph_dim = 16;
  mc.buckets = 2048;
  TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 16;
  cfg.learning_rate = 0.01;
  cfg.early_stop_patience = 100;
  const auto [params, report] = train(split, ctx, init_model(corpus.taxonomy, mc), cfg);
  for (std::size_t e = 1; e < 5; ++e) CHECK(report.epochs[e].total < report.epochs[e - 1].total);
  CHECK(evaluate(ctx, params, split.train).child.micro_f1 >= 0.95);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.batch_size = 1;
  CHECK_ERROR_CODE(cfg.validate(), ErrorCode::InvalidConfig);
  Toy toy;
  CHECK_ERROR_CODE(train(CorpusSplit{}, toy.ctx, test::toy_params(toy.t), TrainConfig{}),
                   ErrorCode::EmptyTrainSet);
}
