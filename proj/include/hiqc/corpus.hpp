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
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiqc/taxonomy.hpp"

namespace hiqc {

struct QueryRecord {
  std::string id;
  std::string text;
  std::optional<LabelId> child;  // present iff labeled

  bool labeled() const noexcept { return child.has_value(); }
  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct CorpusSplit {
  std::vector<QueryRecord> train;
  std::vector<QueryRecord> validation;
  std::vector<QueryRecord> test;
  std::vector<QueryRecord> unlabeled_pool;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

/// Three tab-separated columns `id text child_label`; an empty label column
/// marks an unlabeled query. Errors name the 1-based row.
std::vector<QueryRecord> parse_queries(std::string_view tsv, const Taxonomy& t);
std::vector<QueryRecord> load_queries(const std::filesystem::path& path, const Taxonomy& t);
void write_queries(const std::filesystem::path& path, std::span<const QueryRecord> records,
                   const Taxonomy& t);

/// Seeded shuffle then contiguous slicing, stratified per child label when
/// every class has at least three members.
CorpusSplit split(std::span<const QueryRecord> labeled, std::uint64_t seed,
                  const SplitRatios& ratios = {});

enum class UnlabeledMode {
  Strip,     // file's unlabeled rows plus a fraction of train with labels removed
  Separate,  // only the file's unlabeled rows
};

/// Splits the labeled records, routes unlabeled ones to the pool and, in
/// Strip mode, moves `strip_fraction` of train (seeded) into the pool.
/// Stripped ground truth is written to `stripped_truth` when provided.
CorpusSplit make_split(std::span<const QueryRecord> records, std::uint64_t seed,
                       const SplitRatios& ratios, UnlabeledMode mode, double strip_fraction,
                       std::map<std::string, LabelId>* stripped_truth = nullptr);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  std::size_t parents = 4;
  std::size_t children_per_parent = 4;
  std::size_t queries_per_child = 60;
  double imbalance = 0.3;
  double typo_rate = 0.3;
  double unlabeled_fraction = 0.5;
  std::size_t stems_per_child = 8;
};

struct SyntheticCorpus {
  Taxonomy taxonomy;
  std::vector<QueryRecord> records;
  std::map<std::string, LabelId> truth;  // withheld labels of unlabeled records
  std::map<LabelId, std::vector<std::string>> vocabulary;
};

/// Class k (0-based) of every parent gets ceil(queries_per_child * imbalance^k)
/// queries of 2-5 stems drawn from its own disjoint vocabulary.
SyntheticCorpus gen_synthetic(const SyntheticSpec& spec);

/// ceil(n * ratio^k) with a small tolerance against representation error.
std::size_t geometric_class_size(std::size_t n, double ratio, std::size_t k);

/// One random single-character insert, delete or substitute.
std::string apply_typo(std::string_view text, std::mt19937_64& rng);

void write_truth(const std::filesystem::path& path, const std::map<std::string, LabelId>& truth,
                 const Taxonomy& t);
std::map<std::string, LabelId> load_truth(const std::filesystem::path& path, const Taxonomy& t);

}  // namespace hiqc
