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

#include "hiqc/selftrain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <set>

#include "hiqc/encoder.hpp"
#include "hiqc/error.hpp"
#include "hiqc/eval.hpp"
#include "hiqc/random.hpp"

namespace hiqc {

void SamplerConfig::validate() const {
  if (k_neighbors < 1) throw Error(ErrorCode::InvalidConfig, "k_neighbors must be at least 1");
  if (!(w_child >= 0 && w_child <= 1)) throw Error(ErrorCode::InvalidConfig, "w_child must be in [0,1]");
  if (!(epsilon > 0 && epsilon < 0.1)) throw Error(ErrorCode::InvalidConfig, "epsilon must be in (0, 0.1)");
  if (!(temperature > 0)) throw Error(ErrorCode::InvalidConfig, "temperature must be positive");
  if (!(budget_fraction >= 0 && budget_fraction <= 1)) {
    throw Error(ErrorCode::InvalidConfig, "budget_fraction must be in [0,1]");
  }
}

std::size_t SamplerConfig::budget_for(std::size_t pool_size) const {
  if (budget_count) return *budget_count;
  if (budget_fraction <= 0 || pool_size == 0) return 0;
  const auto b = static_cast<std::size_t>(std::ceil(budget_fraction * static_cast<double>(pool_size) - 1e-9));
  return std::max<std::size_t>(1, b);
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw Error(ErrorCode::LengthMismatch, "KL arguments differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

Vector smoothed_onehot(std::size_t n, std::size_t hot, double eps) {
  if (n == 1) return {1.0};
  Vector v(n, eps / static_cast<double>(n - 1));
  v.at(hot) = 1.0 - eps;
  return v;
}

namespace {

Vector renormalized(const Prediction& pred, const Taxonomy& t, std::span<const LabelId> labels) {
  Vector d;
  d.reserve(labels.size());
  double total = 0.0;
  for (LabelId l : labels) {
    const double v = std::max(pred.probs.at(t.head_index(l)), 1e-12);
    d.push_back(v);
    total += v;
  }
  for (double& v : d) v /= total;
  return d;
}

double level_part(std::span<const std::size_t> ranks, std::size_t n, const Vector& predicted,
                  double eps) {
  std::vector<Vector> hots;
  hots.reserve(ranks.size());
  Vector mean(n, 0.0);
  for (auto r : ranks) {
    hots.push_back(smoothed_onehot(n, r, eps));
    for (std::size_t i = 0; i < n; ++i) mean[i] += hots.back()[i];
  }
  for (double& v : mean) v /= static_cast<double>(ranks.size());
  double to_pred = 0.0, to_mean = 0.0;
  for (const auto& h : hots) {
    to_pred += kl_divergence(h, predicted);
    to_mean += kl_divergence(h, mean);
  }
  const double k = static_cast<double>(ranks.size());
  return to_pred / k + to_mean / k;
}

}  // namespace

Vector child_distribution(const Prediction& pred, const Taxonomy& t) {
  return renormalized(pred, t, t.children());
}

Vector parent_distribution(const Prediction& pred, const Taxonomy& t) {
  return renormalized(pred, t, t.leaf_parents());
}

double neighborhood_score(const Prediction& pred, std::span<const LabelId> neighbor_children,
                          const Taxonomy& t, const SamplerConfig& cfg) {
  if (neighbor_children.empty()) throw Error(ErrorCode::EmptyNeighborhood, "no neighbors to score against");
  // Sorting the ranks makes the floating-point sums independent of neighbor order.
  std::vector<std::size_t> child_ranks, parent_ranks;
  for (LabelId c : neighbor_children) {
    child_ranks.push_back(t.child_rank(c));
    parent_ranks.push_back(t.leaf_parent_rank(t.parent_of(c)));
  }
  std::sort(child_ranks.begin(), child_ranks.end());
  std::sort(parent_ranks.begin(), parent_ranks.end());
  double dist = 0.0;
  if (cfg.w_child > 0) {
    dist += cfg.w_child *
            level_part(child_ranks, t.children().size(), child_distribution(pred, t), cfg.epsilon);
  }
  if (cfg.w_child < 1) {
    dist += (1.0 - cfg.w_child) * level_part(parent_ranks, t.leaf_parents().size(),
                                             parent_distribution(pred, t), cfg.epsilon);
  }
  return dist;
}

std::vector<std::string> sample_candidates(std::span<const ScoredCandidate> scored,
                                           std::size_t budget, std::uint64_t seed,
                                           const SamplerConfig& cfg) {
  if (budget > scored.size()) {
    throw Error(ErrorCode::BudgetExceedsPool, "budget " + std::to_string(budget) + " exceeds pool of " +
                                                  std::to_string(scored.size()));
  }
  std::vector<ScoredCandidate> left(scored.begin(), scored.end());
  std::sort(left.begin(), left.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  double lo = 0.0;
  if (!left.empty()) {
    lo = std::min_element(left.begin(), left.end(), [](const auto& a, const auto& b) {
           return a.dist < b.dist;
         })->dist;
  }
  std::vector<double> weight;
  weight.reserve(left.size());
  for (const auto& c : left) {
    // Shifting by the minimum keeps exp() in range without changing ratios.
    weight.push_back(cfg.literal_prob_direction ? std::max(c.dist, 0.0)
                                                : std::exp(-(c.dist - lo) / cfg.temperature));
  }

  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(budget);
  while (out.size() < budget) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t pick = left.size() - 1;
    if (total > 0) {
      const double u = uniform01(rng) * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < left.size(); ++i) {
        acc += weight[i];
        if (u < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = uniform_index(rng, left.size());
    }
    out.push_back(left[pick].id);
    left.erase(left.begin() + static_cast<std::ptrdiff_t>(pick));
    weight.erase(weight.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

namespace {

std::vector<std::string> ids_of(std::span<const QueryRecord> labeled) {
  if (labeled.empty()) throw Error(ErrorCode::EmptyIndex, "no labeled queries to index");
  std::vector<std::string> ids;
  ids.reserve(labeled.size());
  for (const auto& r : labeled) ids.push_back(r.id);
  return ids;
}

}  // namespace

NeighborIndex build_index(std::span<const QueryRecord> labeled, Matrix keys,
                          const SamplerConfig& cfg) {
  return NeighborIndex::over_embeddings(cfg.index_kind, ids_of(labeled), std::move(keys), cfg.hnsw);
}

NeighborIndex build_index(std::span<const QueryRecord> labeled, std::vector<std::string> keys,
                          const SamplerConfig& cfg) {
  if (cfg.index_kind != IndexKind::Levenshtein) {
    throw Error(ErrorCode::KindMismatch, "string keys need the levenshtein index");
  }
  return NeighborIndex::over_strings(ids_of(labeled), std::move(keys));
}

nlohmann::json RoundReport::to_json(const Taxonomy& t) const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : sampled) {
    rows.push_back({{"id", s.id},
                    {"pseudo_child", t.name(s.child)},
                    {"pseudo_parent", t.name(s.parent)},
                    {"dist", s.dist}});
  }
  nlohmann::json j{{"round", round},
                   {"sampled", std::move(rows)},
                   {"val_micro_f1", val_micro_f1},
                   {"val_macro_f1", val_macro_f1},
                   {"labeled_size", labeled_size},
                   {"pool_size", pool_size}};
  j["pseudo_label_accuracy"] = pseudo_label_accuracy ? nlohmann::json(*pseudo_label_accuracy) : nlohmann::json();
  return j;
}

void write_round_reports(std::ostream& out, std::span<const RoundReport> rounds, const Taxonomy& t) {
  for (const auto& r : rounds) out << r.to_json(t).dump() << '\n';
}

void write_sampled_ledger(std::ostream& out, std::span<const RoundReport> rounds,
                          const Taxonomy& t) {
  out << "round\tid\tpseudo_child\tpseudo_parent\tdist\n";
  char buf[32];
  for (const auto& r : rounds) {
    for (const auto& s : r.sampled) {
      std::snprintf(buf, sizeof buf, "%.6f", s.dist);
      out << r.round << '\t' << s.id << '\t' << t.name(s.child) << '\t' << t.name(s.parent) << '\t'
          << buf << '\n';
    }
  }
}

std::vector<ScoredCandidate> score_pool(const ModelContext& ctx, const ModelParams& p,
                                        std::span<const QueryRecord> labeled,
                                        std::span<const QueryRecord> pool,
                                        const SamplerConfig& cfg,
                                        std::vector<Prediction>* predictions) {
  auto preds = predict(ctx, p, pool);
  std::vector<LabelId> labels;
  labels.reserve(labeled.size());
  for (const auto& r : labeled) labels.push_back(*r.child);

  const bool edit = cfg.index_kind == IndexKind::Levenshtein;
  NeighborIndex index;
  Matrix pool_keys;
  std::vector<std::string> pool_strings;
  if (edit) {
    std::vector<std::string> keys;
    keys.reserve(labeled.size());
    for (const auto& r : labeled) keys.push_back(normalize_text(r.text));
    for (const auto& r : pool) pool_strings.push_back(normalize_text(r.text));
    index = build_index(labeled, std::move(keys), cfg);
  } else {
    index = build_index(labeled, batch_embed(ctx, p, labeled), cfg);
    pool_keys = batch_embed(ctx, p, pool);
  }

  std::vector<ScoredCandidate> out(pool.size());
  std::exception_ptr failure;
  const auto n = static_cast<long>(pool.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (long i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      const auto nb = edit ? index.knn(std::string_view(pool_strings[u]), cfg.k_neighbors)
                           : index.knn(pool_keys.row(u), cfg.k_neighbors);
      std::vector<LabelId> kids;
      kids.reserve(nb.size());
      for (const auto& x : nb) kids.push_back(labels[x.entry]);
      out[u] = {pool[u].id, neighborhood_score(preds[u], kids, ctx.taxonomy, cfg)};
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (predictions) *predictions = std::move(preds);
  return out;
}

SelfTrainResult selftrain_loop(const CorpusSplit& split, const ModelContext& ctx, ModelParams init,
                               const TrainConfig& train_cfg, const SamplerConfig& cfg,
                               const std::map<std::string, LabelId>* truth) {
  cfg.validate();
  train_cfg.validate();
  SelfTrainResult res;
  res.params = init;
  if (split.unlabeled_pool.empty()) return res;

  CorpusSplit cur = split;
  std::sort(cur.unlabeled_pool.begin(), cur.unlabeled_pool.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  const auto& monitor_of = [&]() -> const std::vector<QueryRecord>& {
    return cur.validation.empty() ? cur.train : cur.validation;
  };
  const std::size_t budget = cfg.budget_for(split.unlabeled_pool.size());

  ModelParams params = std::move(init);
  const auto start = evaluate(ctx, params, monitor_of());
  double best_macro = start.child.macro_f1;
  double best_micro = start.child.micro_f1;
  std::size_t stale = 0;

  for (std::size_t round = 1; round <= cfg.max_rounds; ++round) {
    if (cur.unlabeled_pool.empty()) break;
    RoundReport rep;
    rep.round = round;

    const std::size_t take = std::min(budget, cur.unlabeled_pool.size());
    if (take > 0) {
      std::vector<Prediction> preds;
      const auto scored = score_pool(ctx, params, cur.train, cur.unlabeled_pool, cfg, &preds);
      const auto chosen = sample_candidates(scored, take, mix_seed(cfg.seed, round), cfg);
      std::map<std::string, std::size_t> where;
      for (std::size_t i = 0; i < cur.unlabeled_pool.size(); ++i) where[cur.unlabeled_pool[i].id] = i;
      std::set<std::size_t> gone;
      std::size_t correct = 0, judged = 0;
      for (const auto& id : chosen) {
        const auto i = where.at(id);
        gone.insert(i);
        QueryRecord r = cur.unlabeled_pool[i];
        r.child = preds[i].child;
        cur.train.push_back(r);
        rep.sampled.push_back({id, preds[i].child, preds[i].parent, scored[i].dist});
        if (truth) {
          if (auto it = truth->find(id); it != truth->end()) {
            ++judged;
            if (it->second == preds[i].child) ++correct;
          }
        }
      }
      if (judged > 0) rep.pseudo_label_accuracy = static_cast<double>(correct) / static_cast<double>(judged);
      std::vector<QueryRecord> rest;
      rest.reserve(cur.unlabeled_pool.size() - gone.size());
      for (std::size_t i = 0; i < cur.unlabeled_pool.size(); ++i) {
        if (!gone.count(i)) rest.push_back(std::move(cur.unlabeled_pool[i]));
      }
      cur.unlabeled_pool = std::move(rest);
    }

    TrainConfig round_cfg = train_cfg;
    round_cfg.seed = mix_seed(train_cfg.seed, round);
    params = train(cur, ctx, std::move(params), round_cfg).first;

    const auto ev = evaluate(ctx, params, monitor_of());
    rep.val_micro_f1 = ev.child.micro_f1;
    rep.val_macro_f1 = ev.child.macro_f1;
    rep.labeled_size = cur.train.size();
    rep.pool_size = cur.unlabeled_pool.size();
    res.rounds.push_back(std::move(rep));

    if (ev.child.macro_f1 > best_macro ||
        (ev.child.macro_f1 == best_macro && ev.child.micro_f1 >= best_micro)) {
      best_macro = ev.child.macro_f1;
      best_micro = ev.child.micro_f1;
      res.params = params;
      res.best_round = round;
      stale = 0;
    } else if (++stale >= cfg.patience_rounds) {
      break;
    }
  }
  return res;
}

}  // namespace hiqc
