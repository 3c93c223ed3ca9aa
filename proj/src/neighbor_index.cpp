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

#include "hiqc/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "hiqc/error.hpp"
#include "hiqc/kernels.hpp"
#include "hiqc/random.hpp"

namespace hiqc {

std::string_view to_string(IndexKind k) {
  switch (k) {
    case IndexKind::ExactCosine: return "exact-cosine";
    case IndexKind::HnswCosine: return "hnsw-cosine";
    case IndexKind::Levenshtein: return "levenshtein";
  }
  return "?";
}

IndexKind parse_index_kind(std::string_view s) {
  if (s == "exact-cosine" || s == "exact") return IndexKind::ExactCosine;
  if (s == "hnsw-cosine" || s == "hnsw") return IndexKind::HnswCosine;
  if (s == "levenshtein" || s == "edit") return IndexKind::Levenshtein;
  throw Error(ErrorCode::InvalidConfig, "unknown index kind '" + std::string(s) + "'");
}

// ---------------------------------------------------------------------------
// HnswGraph

namespace {

struct Closer {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.distance > b.distance || (a.distance == b.distance && a.entry > b.entry);
  }
};
struct Farther {
  bool operator()(const Neighbor& a, const Neighbor& b) const {
    return a.distance < b.distance || (a.distance == b.distance && a.entry < b.entry);
  }
};

bool ascending(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.entry < b.entry);
}

}  // namespace

HnswGraph::HnswGraph(const Matrix& keys, const HnswParams& params) : params_(params), unit_(keys) {
  if (params_.m < 2) throw Error(ErrorCode::InvalidConfig, "HNSW M must be at least 2");
  for (std::size_t i = 0; i < unit_.rows(); ++i) {
    auto r = unit_.row(i);
    const double n = kernels::norm(r);
    if (n > 0) {
      for (double& x : r) x /= n;
    }
  }
  const double ml = 1.0 / std::log(static_cast<double>(params_.m));
  Rng rng(mix_seed(params_.seed, 0x4A5B));
  levels_.resize(unit_.rows());
  links_.resize(unit_.rows());
  for (std::size_t i = 0; i < unit_.rows(); ++i) {
    const double u = 1.0 - uniform01(rng);  // (0, 1]
    levels_[i] = static_cast<int>(std::floor(-std::log(u) * ml));
    insert(i, levels_[i]);
  }
}

double HnswGraph::distance(std::span<const double> unit_query, std::size_t node) const {
  return 1.0 - kernels::dot(unit_query, unit_.row(node));
}

double HnswGraph::distance(std::size_t a, std::size_t b) const {
  return 1.0 - kernels::dot(unit_.row(a), unit_.row(b));
}

std::vector<Neighbor> HnswGraph::search_layer(std::span<const double> q, std::size_t entry,
                                              std::size_t ef, int level) const {
  std::vector<char> visited(size(), 0);
  std::priority_queue<Neighbor, std::vector<Neighbor>, Closer> candidates;
  std::priority_queue<Neighbor, std::vector<Neighbor>, Farther> best;
  const Neighbor start{entry, distance(q, entry)};
  visited[entry] = 1;
  candidates.push(start);
  best.push(start);
  while (!candidates.empty()) {
    const Neighbor c = candidates.top();
    candidates.pop();
    if (c.distance > best.top().distance && best.size() >= ef) break;
    for (std::size_t nb : links_[c.entry][static_cast<std::size_t>(level)]) {
      if (visited[nb]) continue;
      visited[nb] = 1;
      const double d = distance(q, nb);
      if (best.size() < ef || d < best.top().distance) {
        candidates.push({nb, d});
        best.push({nb, d});
        if (best.size() > ef) best.pop();
      }
    }
  }
  std::vector<Neighbor> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::sort(out.begin(), out.end(), ascending);
  return out;
}

std::vector<std::size_t> HnswGraph::select_neighbors(std::size_t base,
                                                     const std::vector<Neighbor>& candidates,
                                                     std::size_t m) const {
  // Diversity heuristic: keep a candidate only if it is closer to the base
  // than to every neighbor already kept.
  std::vector<Neighbor> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(), ascending);
  std::vector<std::size_t> kept;
  for (const auto& c : sorted) {
    if (c.entry == base) continue;
    if (kept.size() >= m) break;
    bool good = true;
    for (std::size_t r : kept) {
      if (distance(c.entry, r) < c.distance) {
        good = false;
        break;
      }
    }
    if (good) kept.push_back(c.entry);
  }
  return kept;
}

void HnswGraph::insert(std::size_t node, int level) {
  links_[node].assign(static_cast<std::size_t>(level) + 1, {});
  if (max_level_ < 0) {
    entry_ = node;
    max_level_ = level;
    return;
  }
  const auto q = unit_.row(node);
  std::size_t cur = entry_;
  for (int l = max_level_; l > level; --l) cur = search_layer(q, cur, 1, l).front().entry;
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    const auto found = search_layer(q, cur, params_.ef_construction, l);
    const auto lu = static_cast<std::size_t>(l);
    links_[node][lu] = select_neighbors(node, found, params_.m);
    const std::size_t cap = l == 0 ? 2 * params_.m : params_.m;
    for (std::size_t nb : links_[node][lu]) {
      auto& nl = links_[nb][lu];
      nl.push_back(node);
      if (nl.size() > cap) {
        std::vector<Neighbor> cands;
        cands.reserve(nl.size());
        for (std::size_t x : nl) cands.push_back({x, distance(nb, x)});
        nl = select_neighbors(nb, cands, cap);
      }
    }
    cur = found.front().entry;
  }
  if (level > max_level_) {
    entry_ = node;
    max_level_ = level;
  }
}

std::vector<Neighbor> HnswGraph::search(std::span<const double> query, std::size_t k) const {
  if (size() == 0 || k == 0) return {};
  Vector q(query.begin(), query.end());
  const double n = kernels::norm(q);
  if (n > 0) {
    for (double& x : q) x /= n;
  }
  std::size_t cur = entry_;
  for (int l = max_level_; l > 0; --l) cur = search_layer(q, cur, 1, l).front().entry;
  auto found = search_layer(q, cur, std::max(params_.ef_search, k), 0);
  if (found.size() > k) found.resize(k);
  return found;
}

// ---------------------------------------------------------------------------
// NeighborIndex

NeighborIndex NeighborIndex::over_embeddings(IndexKind kind, std::vector<std::string> ids, Matrix keys,
                                             const HnswParams& hnsw) {
  if (kind == IndexKind::Levenshtein) {
    throw Error(ErrorCode::KindMismatch, "levenshtein index needs string keys");
  }
  if (ids.empty()) throw Error(ErrorCode::EmptyIndex, "no labeled queries to index");
  if (ids.size() != keys.rows()) throw Error(ErrorCode::KeyMismatch, "one key per indexed id required");
  NeighborIndex idx;
  idx.kind_ = kind;
  idx.ids_ = std::move(ids);
  idx.vectors_ = std::move(keys);
  if (kind == IndexKind::HnswCosine) idx.hnsw_ = std::make_shared<const HnswGraph>(idx.vectors_, hnsw);
  return idx;
}

NeighborIndex NeighborIndex::over_strings(std::vector<std::string> ids, std::vector<std::string> keys) {
  if (ids.empty()) throw Error(ErrorCode::EmptyIndex, "no labeled queries to index");
  if (ids.size() != keys.size()) throw Error(ErrorCode::KeyMismatch, "one key per indexed id required");
  NeighborIndex idx;
  idx.kind_ = IndexKind::Levenshtein;
  idx.ids_ = std::move(ids);
  idx.strings_ = std::move(keys);
  return idx;
}

namespace {

template <class Dist>
std::vector<Neighbor> top_k(const std::vector<std::string>& ids, const Dist& dist, std::size_t k) {
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto less = [&](std::size_t a, std::size_t b) {
    if (dist[a] != dist[b]) return dist[a] < dist[b];
    return ids[a] < ids[b];
  };
  k = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
  std::vector<Neighbor> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back({order[i], static_cast<double>(dist[order[i]])});
  return out;
}

}  // namespace

std::vector<Neighbor> NeighborIndex::knn(std::span<const double> key, std::size_t k) const {
  if (kind_ == IndexKind::Levenshtein) throw Error(ErrorCode::KindMismatch, "levenshtein index takes string keys");
  if (key.size() != vectors_.cols()) throw Error(ErrorCode::KeyMismatch, "query key width differs from index");
  if (kind_ == IndexKind::HnswCosine) return hnsw_->search(key, std::min(k, size()));
  return top_k(ids_, kernels::cosine_distances(key, vectors_), k);
}

std::vector<Neighbor> NeighborIndex::knn(std::string_view key, std::size_t k) const {
  if (kind_ != IndexKind::Levenshtein) throw Error(ErrorCode::KindMismatch, "cosine index takes vector keys");
  return top_k(ids_, kernels::edit_distances(key, strings_), k);
}

}  // namespace hiqc
