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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiqc/matrix.hpp"

namespace hiqc {

/// Hashed bag-of-features text encoder: character n-grams of the normalized
/// text plus whitespace tokens, each hashed into a bucket of a learnable
/// table and mean-pooled.
struct EncoderParams {
  std::size_t buckets = 8192;
  std::size_t dim = 64;
  std::uint64_t hash_seed = 0x9AE16A3B2F90404FULL;
  int ngram_min = 3;
  int ngram_max = 5;
  Matrix table;  // buckets x dim

  /// N(0, scale^2) table entries.
  static EncoderParams random(std::size_t buckets, std::size_t dim, std::uint64_t seed,
                              double scale = 0.1);
  void validate() const;
};

/// Lowercases ASCII, collapses whitespace runs and trims.
std::string normalize_text(std::string_view text);

/// Feature strings in extraction order: n-grams (ngram_min..ngram_max over the
/// normalized text) followed by the whitespace tokens.
std::vector<std::string> extract_features(std::string_view text, int ngram_min, int ngram_max);

std::uint32_t feature_bucket(const EncoderParams& p, std::string_view feature);

/// Sorted bucket multiset for a text; throws EmptyText for blank input.
std::vector<std::uint32_t> feature_buckets(const EncoderParams& p, std::string_view text);

/// Mean of the table rows at `sorted_buckets`, summed in ascending bucket
/// order so equal multisets give bit-identical vectors.
Vector pool_rows(const Matrix& table, std::span<const std::uint32_t> sorted_buckets);

Vector encode(const EncoderParams& p, std::string_view text);

/// Externally produced embeddings keyed by query id.
class EmbeddingStore {
 public:
  /// Line 1 `N d`, then N lines `id v1 ... vd`.
  static EmbeddingStore parse(std::string_view text);
  static EmbeddingStore load(const std::filesystem::path& path);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const Vector* find(std::string_view id) const;

 private:
  std::size_t dim_ = 0;
  std::map<std::string, Vector, std::less<>> rows_;
};

}  // namespace hiqc
