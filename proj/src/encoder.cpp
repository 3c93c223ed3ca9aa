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

#include "hiqc/encoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hiqc/error.hpp"
#include "hiqc/random.hpp"
#include "hiqc/taxonomy.hpp"

namespace hiqc {

EncoderParams EncoderParams::random(std::size_t buckets, std::size_t dim, std::uint64_t seed,
                                    double scale) {
  EncoderParams p;
  p.buckets = buckets;
  p.dim = dim;
  p.table = Matrix(buckets, dim);
  Rng rng(mix_seed(seed, 0xE7C0));
  for (double& x : p.table.flat()) x = scale * standard_normal(rng);
  p.validate();
  return p;
}

void EncoderParams::validate() const {
  if (buckets < 1024 || dim < 8) {
    throw Error(ErrorCode::InvalidConfig, "encoder needs buckets >= 1024 and dim >= 8");
  }
  if (ngram_min < 1 || ngram_max < ngram_min) {
    throw Error(ErrorCode::InvalidConfig, "bad n-gram range");
  }
  if (table.rows() != buckets || table.cols() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "encoder table shape does not match buckets x dim");
  }
  for (double x : table.flat()) {
    if (!std::isfinite(x)) throw Error(ErrorCode::InvalidConfig, "encoder table has non-finite entries");
  }
}

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (unsigned char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
  }
  return out;
}

std::vector<std::string> extract_features(std::string_view text, int ngram_min, int ngram_max) {
  const std::string s = normalize_text(text);
  std::vector<std::string> out;
  for (int n = ngram_min; n <= ngram_max; ++n) {
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= s.size(); ++i) out.emplace_back(s.substr(i, len));
  }
  std::size_t pos = 0;
  while (pos < s.size()) {
    auto sp = s.find(' ', pos);
    if (sp == std::string::npos) sp = s.size();
    out.emplace_back(s.substr(pos, sp - pos));
    pos = sp + 1;
  }
  return out;
}

std::uint32_t feature_bucket(const EncoderParams& p, std::string_view feature) {
  return static_cast<std::uint32_t>(fnv1a64(feature, p.hash_seed) % p.buckets);
}

std::vector<std::uint32_t> feature_buckets(const EncoderParams& p, std::string_view text) {
  const auto feats = extract_features(text, p.ngram_min, p.ngram_max);
  if (feats.empty()) throw Error(ErrorCode::EmptyText, "cannot encode blank text");
  std::vector<std::uint32_t> out;
  out.reserve(feats.size());
  for (const auto& f : feats) out.push_back(feature_bucket(p, f));
  std::sort(out.begin(), out.end());
  return out;
}

Vector pool_rows(const Matrix& table, std::span<const std::uint32_t> sorted_buckets) {
  Vector out(table.cols(), 0.0);
  for (auto b : sorted_buckets) {
    const auto row = table.row(b);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(sorted_buckets.size());
  for (double& x : out) x *= inv;
  return out;
}

Vector encode(const EncoderParams& p, std::string_view text) {
  const auto buckets = feature_buckets(p, text);
  return pool_rows(p.table, buckets);
}

EmbeddingStore EmbeddingStore::parse(std::string_view text) {
  EmbeddingStore store;
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::MalformedHeader, "missing `N d` header");
  std::size_t n = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> store.dim_) || (hs >> extra) || store.dim_ == 0) {
      throw Error(ErrorCode::MalformedHeader, "header must be `N d` with d > 0, got '" + line + "'");
    }
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    std::istringstream ls(line);
    std::string id;
    if (!(ls >> id)) continue;
    Vector v;
    std::string tok;
    while (ls >> tok) {
      double x = 0.0;
      const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size() || !std::isfinite(x)) {
        throw Error(ErrorCode::MalformedRow, "embedding row " + std::to_string(row) + ": bad value '" + tok + "'");
      }
      v.push_back(x);
    }
    if (v.size() != store.dim_) {
      throw Error(ErrorCode::WidthMismatch, "embedding row " + std::to_string(row) + " has " +
                                                std::to_string(v.size()) + " values, header says " +
                                                std::to_string(store.dim_));
    }
    if (!store.rows_.emplace(id, std::move(v)).second) {
      throw Error(ErrorCode::DuplicateId, "embedding id '" + id + "' repeats");
    }
  }
  if (store.rows_.size() != n) {
    throw Error(ErrorCode::MalformedHeader, "header announces " + std::to_string(n) + " rows, found " +
                                                std::to_string(store.rows_.size()));
  }
  return store;
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const Vector* EmbeddingStore::find(std::string_view id) const {
  const auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

}  // namespace hiqc
