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

#include "hiqc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "hiqc/error.hpp"
#include "hiqc/eval.hpp"

namespace hiqc {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be at least 1");
  if (batch_size < 2) throw Error(ErrorCode::InvalidConfig, "batch_size must be at least 2");
  if (!(learning_rate >= 0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be non-negative");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1) || !(adam_eps > 0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam betas must be in [0,1) and eps positive");
  }
  weights.validate();
}

nlohmann::json TrainReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : epochs) {
    rows.push_back({{"epoch", e.epoch},
                    {"classification", e.classification},
                    {"intra", e.intra},
                    {"inter", e.inter},
                    {"total", e.total},
                    {"val_micro_f1", e.val_micro_f1},
                    {"val_macro_f1", e.val_macro_f1}});
  }
  return {{"epochs", std::move(rows)},
          {"stopped_epoch", stopped_epoch},
          {"best_epoch", best_epoch},
          {"best_val_macro_f1", best_val_macro_f1}};
}

AdamState AdamState::zeros_like(const ModelParams& p) {
  return {Gradients::zeros_like(p), Gradients::zeros_like(p), 0};
}

void adam_step(ModelParams& p, const Gradients& grads, AdamState& state, const TrainConfig& cfg) {
  ++state.step;
  const auto hyper = cfg.adam();
  for (auto g : kAllParamGroups) {
    if (!p.trains(g)) continue;
    kernels::adam_update(p.group(g), grads.group(g), state.m.group(g), state.v.group(g), hyper,
                         state.step);
  }
  ++p.revision;
}

LossBreakdown batch_loss(const ModelContext& ctx, const ModelParams& p,
                         std::span<const QueryRecord> batch, const LossWeights& w,
                         Gradients* grads) {
  std::vector<LabelId> children, parents;
  children.reserve(batch.size());
  parents.reserve(batch.size());
  for (const auto& r : batch) {
    if (!r.child) throw Error(ErrorCode::UnknownLabel, "training query '" + r.id + "' has no label");
    children.push_back(*r.child);
    parents.push_back(ctx.taxonomy.parent_of(*r.child));
  }

  GraphActivations graph;
  if (p.label_hierarchy) graph = gcn_forward_full(ctx.graph, p);
  const auto act = forward_batch(ctx, p, graph, batch);

  const bool want = grads != nullptr;
  const bool contrastive_live = w.w_contrastive > 0;
  LossBreakdown out;
  Matrix dlogits, dintra, dinter;
  out.classification = classification_loss(act.probs, children, ctx.taxonomy, w, want ? &dlogits : nullptr);
  out.intra = intra_class_loss(act.fused, children, parents, w.tau,
                               want && contrastive_live ? &dintra : nullptr, w.literal_contrastive);
  out.inter = inter_class_loss(act.fused, children, parents, w.tau,
                               want && contrastive_live ? &dinter : nullptr, w.literal_contrastive);
  out.total = combined_loss(out.classification, out.intra, out.inter, w);
  if (!want) return out;

  const double cls_scale = 1.0 - w.w_contrastive;
  for (double& x : dlogits.flat()) x *= cls_scale;
  Matrix dfused;
  if (contrastive_live) {
    dfused = Matrix(act.fused.rows(), act.fused.cols());
    const double a = w.w_contrastive * w.w_intra;
    const double b = w.w_contrastive * (1.0 - w.w_intra);
    auto d = dfused.flat();
    const auto di = dintra.flat();
    const auto de = dinter.flat();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = a * di[i] + b * de[i];
  }
  backward_batch(ctx, p, graph, act, dlogits, dfused, *grads);
  return out;
}

std::vector<std::vector<std::size_t>> plan_epoch(std::span<const QueryRecord> train,
                                                 const Taxonomy& t, std::size_t batch_size,
                                                 Rng& rng) {
  const std::size_t n = train.size();
  std::vector<std::vector<std::size_t>> batches;
  if (n == 0) return batches;
  const std::size_t bsz = std::min(batch_size, n);
  const std::size_t num_batches = (n + bsz - 1) / bsz;

  // Per-child queues and, per parent, the children actually present.
  std::map<LabelId, std::vector<std::size_t>> by_child;
  for (std::size_t i = 0; i < n; ++i) by_child[*train[i].child].push_back(i);
  std::map<LabelId, std::vector<LabelId>> kids_present;
  for (const auto& [c, members] : by_child) kids_present[t.parent_of(c)].push_back(c);
  std::vector<LabelId> pairable;
  for (const auto& [parent, kids] : kids_present) {
    if (kids.size() >= 2) pairable.push_back(parent);
  }
  shuffle(std::span(pairable), rng);
  std::map<LabelId, std::size_t> cursor;
  for (auto& [c, members] : by_child) shuffle(std::span(members), rng);
  auto next_of = [&](LabelId c) {
    auto& members = by_child[c];
    auto& at = cursor[c];
    if (at == members.size()) {
      shuffle(std::span(members), rng);
      at = 0;
    }
    return members[at++];
  };

  std::vector<std::size_t> stream(n);
  for (std::size_t i = 0; i < n; ++i) stream[i] = i;
  shuffle(std::span(stream), rng);
  std::size_t stream_at = 0;

  for (std::size_t b = 0; b < num_batches; ++b) {
    std::vector<std::size_t> batch;
    std::set<std::size_t> in_batch;
    if (!pairable.empty() && bsz >= 2) {
      const auto& kids = kids_present[pairable[b % pairable.size()]];
      const std::size_t first = uniform_index(rng, kids.size());
      std::size_t second = uniform_index(rng, kids.size() - 1);
      if (second >= first) ++second;
      for (LabelId c : {kids[first], kids[second]}) {
        const auto i = next_of(c);
        batch.push_back(i);
        in_batch.insert(i);
      }
    }
    std::size_t misses = 0;
    while (batch.size() < bsz && misses < 2 * n) {
      if (stream_at == n) {
        shuffle(std::span(stream), rng);
        stream_at = 0;
      }
      const auto i = stream[stream_at++];
      if (in_batch.insert(i).second) {
        batch.push_back(i);
      } else {
        ++misses;
      }
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

namespace {

bool all_finite(const LossBreakdown& l) {
  return std::isfinite(l.classification) && std::isfinite(l.intra) && std::isfinite(l.inter) &&
         std::isfinite(l.total);
}

}  // namespace

std::pair<ModelParams, TrainReport> train(const CorpusSplit& split, const ModelContext& ctx,
                                          ModelParams init, const TrainConfig& cfg) {
  cfg.validate();
  if (split.train.empty()) throw Error(ErrorCode::EmptyTrainSet, "no labeled training queries");
  init.validate(ctx.taxonomy);

  const auto& monitor = split.validation.empty() ? split.train : split.validation;
  ModelParams params = std::move(init);
  ModelParams best = params;
  AdamState state = AdamState::zeros_like(params);
  Gradients grads = Gradients::zeros_like(params);
  TrainReport report;
  double best_macro = -1.0;
  double best_micro = -1.0;
  std::size_t stale = 0;

  std::vector<QueryRecord> batch;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, epoch));
    const auto plan = plan_epoch(split.train, ctx.taxonomy, cfg.batch_size, rng);
    EpochStats stats;
    stats.epoch = epoch;
    for (const auto& members : plan) {
      batch.clear();
      for (auto i : members) batch.push_back(split.train[i]);
      grads.set_zero();
      const auto loss = batch_loss(ctx, params, batch, cfg.weights, &grads);
      if (!all_finite(loss)) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "epoch " + std::to_string(epoch) + ": cls=" + std::to_string(loss.classification) +
                        " intra=" + std::to_string(loss.intra) + " inter=" + std::to_string(loss.inter));
      }
      adam_step(params, grads, state, cfg);
      stats.classification += loss.classification;
      stats.intra += loss.intra;
      stats.inter += loss.inter;
      stats.total += loss.total;
    }
    const double inv = 1.0 / static_cast<double>(plan.size());
    stats.classification *= inv;
    stats.intra *= inv;
    stats.inter *= inv;
    stats.total *= inv;

    const auto ev = evaluate(ctx, params, monitor);
    stats.val_micro_f1 = ev.child.micro_f1;
    stats.val_macro_f1 = ev.child.macro_f1;
    report.epochs.push_back(stats);
    report.stopped_epoch = epoch;
    // A Macro-F1 tie keeps the later epoch unless Micro-F1 dropped.
    if (stats.val_macro_f1 > best_macro ||
        (stats.val_macro_f1 == best_macro && stats.val_micro_f1 >= best_micro)) {
      best_macro = stats.val_macro_f1;
      best_micro = stats.val_micro_f1;
      best = params;
      report.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= cfg.early_stop_patience) {
      break;
    }
  }
  report.best_val_macro_f1 = best_macro;
  return {std::move(best), std::move(report)};
}

GradCheckResult grad_check(const ModelParams& p, std::span<const QueryRecord> batch,
                           const ModelContext& ctx, const LossWeights& w,
                           const GradCheckOptions& opt) {
  ModelParams probe = p;
  Gradients analytic = Gradients::zeros_like(p);
  batch_loss(ctx, probe, batch, w, &analytic);

  // Encoder rows the batch reads, plus a few it does not.
  std::set<std::uint32_t> touched;
  if (!ctx.store) {
    for (const auto& r : batch) {
      for (auto b : feature_buckets(p.encoder, r.text)) touched.insert(b);
    }
  }
  std::vector<std::uint32_t> rows(touched.begin(), touched.end());
  for (std::uint32_t b = 0, extra = 0; b < p.encoder.buckets && extra < opt.untouched_rows; ++b) {
    if (!touched.count(b)) {
      rows.push_back(b);
      ++extra;
    }
  }

  GradCheckResult res;
  auto probe_entry = [&](ParamGroup g, std::size_t i) {
    auto values = probe.group(g);
    const double orig = values[i];
    values[i] = orig + opt.step;
    const double up = batch_loss(ctx, probe, batch, w).total;
    values[i] = orig - opt.step;
    const double down = batch_loss(ctx, probe, batch, w).total;
    values[i] = orig;
    const double numeric = (up - down) / (2.0 * opt.step);
    const double a = analytic.group(g)[i];
    const double abs_err = std::abs(a - numeric);
    const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), opt.denominator_floor});
    res.max_absolute_error = std::max(res.max_absolute_error, abs_err);
    res.max_relative_error = std::max(res.max_relative_error, rel);
    auto& ge = res.group_relative_error[g];
    ge = std::max(ge, rel);
    ++res.checked;
  };

  for (auto g : kAllParamGroups) {
    if (!p.trains(g)) continue;
    if (g == ParamGroup::EncoderTable) {
      const std::size_t dim = p.encoder.dim;
      for (auto r : rows) {
        for (std::size_t j = 0; j < dim; ++j) probe_entry(g, r * dim + j);
      }
      continue;
    }
    for (std::size_t i = 0; i < probe.group(g).size(); ++i) probe_entry(g, i);
  }
  return res;
}

}  // namespace hiqc
