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

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiqc/matrix.hpp"

namespace hiqc {

enum class IndexKind { ExactCosine, HnswCosine, Levenshtein };

std::string_view to_string(IndexKind k);
IndexKind parse_index_kind(std::string_view s);

struct HnswParams {
  std::size_t m = 16;
  std::size_t ef_construction = 200;
  std::size_t ef_search = 64;
  std::uint64_t seed = 42;
};

struct Neighbor {
  std::size_t entry = 0;  // position in the indexed key list
  double distance = 0.0;
};

/// Hierarchical navigable small-world graph over cosine distance. Built by
/// sequential insertion, so construction is deterministic for a given seed.
class HnswGraph {
 public:
  HnswGraph(const Matrix& keys, const HnswParams& params);

  std::vector<Neighbor> search(std::span<const double> query, std::size_t k) const;
  std::size_t size() const noexcept { return unit_.rows(); }
  int max_level() const noexcept { return max_level_; }

 private:
  double distance(std::span<const double> unit_query, std::size_t node) const;
  double distance(std::size_t a, std::size_t b) const;
  std::vector<Neighbor> search_layer(std::span<const double> q, std::size_t entry, std::size_t ef,
                                     int level) const;
  std::vector<std::size_t> select_neighbors(std::size_t base, const std::vector<Neighbor>& candidates,
                                            std::size_t m) const;
  void insert(std::size_t node, int level);

  HnswParams params_;
  Matrix unit_;  // normalized keys
  std::vector<int> levels_;
  std::vector<std::vector<std::vector<std::size_t>>> links_;  // node -> level -> neighbors
  std::size_t entry_ = 0;
  int max_level_ = -1;
};

/// K-nearest-neighbor index over labeled queries. Exact kinds return the true
/// K nearest, ties broken by ascending id.
class NeighborIndex {
 public:
  static NeighborIndex over_embeddings(IndexKind kind, std::vector<std::string> ids, Matrix keys,
                                       const HnswParams& hnsw = {});
  static NeighborIndex over_strings(std::vector<std::string> ids, std::vector<std::string> keys);

  IndexKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::string& id(std::size_t entry) const { return ids_[entry]; }

  /// Ascending distance; K larger than the index returns every entry.
  /// Cosine kinds report 1 - cos.
  std::vector<Neighbor> knn(std::span<const double> key, std::size_t k) const;
  std::vector<Neighbor> knn(std::string_view key, std::size_t k) const;

 private:
  IndexKind kind_ = IndexKind::ExactCosine;
  std::vector<std::string> ids_;
  Matrix vectors_;
  std::vector<std::string> strings_;
  std::shared_ptr<const HnswGraph> hnsw_;
};

}  // namespace hiqc
