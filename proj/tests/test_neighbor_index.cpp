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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "doctest.h"
#include "test_util.hpp"

#include "hiqc/kernels.hpp"
#include "hiqc/neighbor_index.hpp"
#include "hiqc/random.hpp"

using namespace hiqc;

namespace {

std::vector<std::string> make_ids(std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%05zu", i);
    ids.emplace_back(buf);
  }
  return ids;
}

Matrix gaussian_points(std::size_t n, std::size_t d, Rng& rng) {
  Matrix m(n, d);
  for (double& x : m.flat()) x = standard_normal(rng);
  return m;
}

// All-pairs reference: 1 - cos, ties by id.
std::vector<std::string> brute_force(const Matrix& keys, const std::vector<std::string>& ids,
                                     std::span<const double> q, std::size_t k) {
  std::vector<std::pair<double, std::string>> all;
  double qn = 0;
  for (double x : q) qn += x * x;
  qn = std::sqrt(qn);
  for (std::size_t i = 0; i < keys.rows(); ++i) {
    double dot = 0, kn = 0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      dot += q[j] * keys(i, j);
      kn += keys(i, j) * keys(i, j);
    }
    kn = std::sqrt(kn);
    all.emplace_back(kn == 0 || qn == 0 ? 1.0 : 1.0 - dot / (kn * qn), ids[i]);
  }
  std::sort(all.begin(), all.end());
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

std::vector<std::string> ids_of(const NeighborIndex& index, const std::vector<Neighbor>& ns) {
  std::vector<std::string> out;
  for (const auto& n : ns) out.push_back(index.id(n.entry));
  return out;
}

}  // namespace

TEST_CASE("index kind names") {
  CHECK(parse_index_kind("exact-cosine") == IndexKind::ExactCosine);
  CHECK(parse_index_kind("hnsw") == IndexKind::HnswCosine);
  CHECK(parse_index_kind("levenshtein") == IndexKind::Levenshtein);
  CHECK(to_string(IndexKind::HnswCosine) == "hnsw-cosine");
  CHECK_ERROR_CODE(parse_index_kind("faiss"), ErrorCode::InvalidConfig);
}

TEST_CASE("scalar embeddings by hand") {
  // 2-d points whose angle grows with the scalar, so cosine order follows it.
  Matrix keys(3, 2);
  const double xs[3] = {0.1, 0.5, 0.9};
  for (std::size_t i = 0; i < 3; ++i) {
    keys(i, 0) = std::cos(xs[i]);
    keys(i, 1) = std::sin(xs[i]);
  }
  const auto index = NeighborIndex::over_embeddings(IndexKind::ExactCosine, {"a", "b", "c"}, keys);
  const std::vector<double> q{1.0, 0.0};
  CHECK(ids_of(index, index.knn(q, 2)) == std::vector<std::string>{"a", "b"});
  CHECK(index.knn(q, 10).size() == 3);

  const std::vector<double> self{keys(1, 0), keys(1, 1)};
  const auto hit = index.knn(self, 1);
  CHECK(index.id(hit[0].entry) == "b");
  CHECK(hit[0].distance == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("levenshtein index") {
  const auto index = NeighborIndex::over_strings({"k", "s"}, {"knife", "sofa"});
  const auto n = index.knn(std::string_view("nife"), 1);
  REQUIRE(n.size() == 1);
  CHECK(index.id(n[0].entry) == "k");
  CHECK(n[0].distance == 1.0);

  const auto kit = NeighborIndex::over_strings({"x", "y"}, {"sitting", "mitten"});
  const auto all = kit.knn(std::string_view("kitten"), 5);
  REQUIRE(all.size() == 2);
  CHECK(kit.id(all[0].entry) == "y");
  CHECK(all[1].distance == 3.0);
}

TEST_CASE("ties break by ascending id") {
  Matrix keys(4, 2);
  for (std::size_t i = 0; i < 4; ++i) keys(i, 0) = 1.0;
  const auto index = NeighborIndex::over_embeddings(IndexKind::ExactCosine, {"d", "b", "c", "a"}, keys);
  const std::vector<double> q{1.0, 0.0};
  CHECK(ids_of(index, index.knn(q, 3)) == std::vector<std::string>{"a", "b", "c"});
  const auto s = NeighborIndex::over_strings({"z", "m", "a"}, {"ab", "ab", "ab"});
  CHECK(ids_of(s, s.knn(std::string_view("ab"), 2)) == std::vector<std::string>{"a", "m"});
}

TEST_CASE("index errors") {
  CHECK_ERROR_CODE(NeighborIndex::over_embeddings(IndexKind::ExactCosine, {}, Matrix()),
                   ErrorCode::EmptyIndex);
  CHECK_ERROR_CODE(NeighborIndex::over_embeddings(IndexKind::Levenshtein, {"a"}, Matrix(1, 2)),
                   ErrorCode::KindMismatch);
  CHECK_ERROR_CODE(NeighborIndex::over_embeddings(IndexKind::ExactCosine, {"a", "b"}, Matrix(1, 2)),
                   ErrorCode::KeyMismatch);
  const auto index = NeighborIndex::over_embeddings(IndexKind::ExactCosine, {"a"}, Matrix(1, 2, 1.0));
  const std::vector<double> wrong{1, 2, 3};
  CHECK_ERROR_CODE(index.knn(wrong, 1), ErrorCode::KeyMismatch);
  CHECK_ERROR_CODE(index.knn(std::string_view("text"), 1), ErrorCode::KindMismatch);
}

TEST_CASE("exact cosine equals brute force on random instances") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + uniform_index(rng, 400);
    Matrix keys = gaussian_points(n, 32, rng);
    // Duplicate a few rows so the tie rule is exercised.
    for (std::size_t i = 0; i + 1 < n && i < 3; ++i) {
      const auto src = keys.row(uniform_index(rng, n));
      std::copy(src.begin(), src.end(), keys.row(n - 1 - i).begin());
    }
    const auto ids = make_ids(n);
    const auto index = NeighborIndex::over_embeddings(IndexKind::ExactCosine, ids, keys);
    const Matrix q = gaussian_points(1, 32, rng);
    const std::size_t k = 1 + uniform_index(rng, 20);
    CHECK(ids_of(index, index.knn(q.row(0), k)) == brute_force(keys, ids, q.row(0), k));
  }
}

TEST_CASE("hnsw recall and determinism") {
  Rng rng(23);
  const Matrix keys = gaussian_points(2000, 16, rng);
  const auto ids = make_ids(keys.rows());
  const auto exact = NeighborIndex::over_embeddings(IndexKind::ExactCosine, ids, keys);
  const auto hnsw = NeighborIndex::over_embeddings(IndexKind::HnswCosine, ids, keys);
  const auto again = NeighborIndex::over_embeddings(IndexKind::HnswCosine, ids, keys);
  std::size_t hits = 0, total = 0;
  for (int i = 0; i < 50; ++i) {
    const Matrix q = gaussian_points(1, 16, rng);
    const auto truth = exact.knn(q.row(0), 10);
    const auto approx = hnsw.knn(q.row(0), 10);
    CHECK(ids_of(hnsw, approx) == ids_of(again, again.knn(q.row(0), 10)));
    std::set<std::size_t> want;
    for (const auto& n : truth) want.insert(n.entry);
    for (const auto& n : approx) hits += want.count(n.entry);
    total += truth.size();
  }
  CHECK(static_cast<double>(hits) / static_cast<double>(total) >= 0.95);
}
