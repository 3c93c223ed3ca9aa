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

#include "hiqc/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hiqc/error.hpp"
#include "hiqc/random.hpp"

namespace hiqc {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(pos));
      return cols;
    }
    cols.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Largest-remainder apportionment of n items over three ratios; ties go to
// the earlier split.
std::array<std::size_t, 3> apportion(std::size_t n, const SplitRatios& r) {
  const std::array<double, 3> ratio{r.train, r.validation, r.test};
  std::array<std::size_t, 3> out{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = ratio[i] * static_cast<double>(n);
    out[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(out[i]);
    used += out[i];
  }
  while (used < n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < 3; ++i) {
      if (frac[i] > frac[best] + 1e-12) best = i;
    }
    ++out[best];
    frac[best] = -1.0;
    ++used;
  }
  while (used > n) {  // only reachable through the 1e-9 slack
    for (std::size_t i = 3; i-- > 0;) {
      if (out[i] > 0) {
        --out[i];
        --used;
        break;
      }
    }
  }
  return out;
}

void check_ratios(const SplitRatios& r) {
  const double sum = r.train + r.validation + r.test;
  if (std::abs(sum - 1.0) > 1e-9 || r.train < 0 || r.validation < 0 || r.test < 0) {
    throw Error(ErrorCode::InvalidConfig, "split ratios must be non-negative and sum to 1");
  }
}

bool satisfies_nonzero(const std::array<std::size_t, 3>& sizes, const SplitRatios& r) {
  const std::array<double, 3> ratio{r.train, r.validation, r.test};
  for (std::size_t i = 0; i < 3; ++i) {
    if (ratio[i] > 0 && sizes[i] == 0) return false;
  }
  return true;
}

}  // namespace

std::vector<QueryRecord> parse_queries(std::string_view tsv, const Taxonomy& t) {
  std::vector<QueryRecord> out;
  std::size_t row = 0;
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    auto nl = tsv.find('\n', pos);
    if (nl == std::string_view::npos) nl = tsv.size();
    std::string_view line = tsv.substr(pos, nl - pos);
    pos = nl + 1;
    ++row;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 3) {
      throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": expected 3 columns, got " +
                                               std::to_string(cols.size()));
    }
    QueryRecord rec;
    rec.id = std::string(trim(cols[0]));
    rec.text = std::string(trim(cols[1]));
    if (rec.id.empty()) throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row) + ": empty id");
    if (rec.text.empty()) throw Error(ErrorCode::EmptyText, "row " + std::to_string(row) + ": empty query text");
    const auto label = trim(cols[2]);
    if (!label.empty()) {
      const auto id = t.find(label);
      if (!id) {
        throw Error(ErrorCode::UnknownLabel,
                    "row " + std::to_string(row) + ": label '" + std::string(label) + "' not in taxonomy");
      }
      if (!t.is_child(*id)) {
        throw Error(ErrorCode::UnknownLabel, "row " + std::to_string(row) + ": label '" +
                                                 std::string(label) + "' is not a child category");
      }
      rec.child = *id;
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path, const Taxonomy& t) {
  return parse_queries(read_file(path), t);
}

void write_queries(const std::filesystem::path& path, std::span<const QueryRecord> records,
                   const Taxonomy& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& r : records) {
    out << r.id << '\t' << r.text << '\t';
    if (r.child) out << t.name(*r.child);
    out << '\n';
  }
}

CorpusSplit split(std::span<const QueryRecord> labeled, std::uint64_t seed, const SplitRatios& ratios) {
  check_ratios(ratios);
  if (labeled.empty()) throw Error(ErrorCode::EmptyInput, "no labeled records to split");
  const std::size_t nonzero = (ratios.train > 0) + (ratios.validation > 0) + (ratios.test > 0);
  if (labeled.size() < nonzero) {
    throw Error(ErrorCode::EmptyInput, "need at least one record per non-zero split ratio");
  }

  Rng rng(mix_seed(seed, 0x5917));
  std::map<LabelId, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labeled.size(); ++i) {
    by_class[labeled[i].child.value_or(LabelId{0})].push_back(i);
  }
  const bool stratify = std::all_of(by_class.begin(), by_class.end(),
                                    [](const auto& kv) { return kv.second.size() >= 3; });

  std::array<std::vector<std::size_t>, 3> parts;
  bool done = false;
  if (stratify) {
    for (auto& [label, members] : by_class) {
      shuffle(std::span(members), rng);
      const auto sizes = apportion(members.size(), ratios);
      std::size_t at = 0;
      for (std::size_t s = 0; s < 3; ++s) {
        parts[s].insert(parts[s].end(), members.begin() + at, members.begin() + at + sizes[s]);
        at += sizes[s];
      }
    }
    done = satisfies_nonzero({parts[0].size(), parts[1].size(), parts[2].size()}, ratios);
  }
  if (!done) {
    for (auto& p : parts) p.clear();
    std::vector<std::size_t> order(labeled.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(std::span(order), rng);
    auto sizes = apportion(order.size(), ratios);
    const std::array<double, 3> ratio{ratios.train, ratios.validation, ratios.test};
    for (std::size_t s = 0; s < 3; ++s) {
      if (ratio[s] > 0 && sizes[s] == 0) {
        const auto donor = static_cast<std::size_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
        --sizes[donor];
        ++sizes[s];
      }
    }
    std::size_t at = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      parts[s].assign(order.begin() + at, order.begin() + at + sizes[s]);
      at += sizes[s];
    }
  }

  CorpusSplit out;
  std::array<std::vector<QueryRecord>*, 3> dst{&out.train, &out.validation, &out.test};
  for (std::size_t s = 0; s < 3; ++s) {
    shuffle(std::span(parts[s]), rng);
    for (auto i : parts[s]) dst[s]->push_back(labeled[i]);
  }
  return out;
}

CorpusSplit make_split(std::span<const QueryRecord> records, std::uint64_t seed,
                       const SplitRatios& ratios, UnlabeledMode mode, double strip_fraction,
                       std::map<std::string, LabelId>* stripped_truth) {
  std::vector<QueryRecord> labeled, unlabeled;
  std::set<std::string> ids;
  for (const auto& r : records) {
    if (!ids.insert(r.id).second) throw Error(ErrorCode::DuplicateId, "query id '" + r.id + "' repeats");
    (r.labeled() ? labeled : unlabeled).push_back(r);
  }
  CorpusSplit out = split(labeled, seed, ratios);
  out.unlabeled_pool = std::move(unlabeled);
  if (mode == UnlabeledMode::Strip && strip_fraction > 0 && !out.train.empty()) {
    if (strip_fraction >= 1.0) {
      throw Error(ErrorCode::InvalidConfig, "strip fraction must be below 1");
    }
    const auto k = static_cast<std::size_t>(
        std::llround(strip_fraction * static_cast<double>(out.train.size())));
    std::vector<std::size_t> order(out.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(mix_seed(seed, 0x57219));
    shuffle(std::span(order), rng);
    std::vector<bool> strip(out.train.size(), false);
    for (std::size_t i = 0; i < k && i + 1 < order.size(); ++i) strip[order[i]] = true;
    std::vector<QueryRecord> keep;
    for (std::size_t i = 0; i < out.train.size(); ++i) {
      auto r = out.train[i];
      if (strip[i]) {
        if (stripped_truth) (*stripped_truth)[r.id] = *r.child;
        r.child.reset();
        out.unlabeled_pool.push_back(std::move(r));
      } else {
        keep.push_back(std::move(r));
      }
    }
    out.train = std::move(keep);
  }
  return out;
}

std::size_t geometric_class_size(std::size_t n, double ratio, std::size_t k) {
  const double x = static_cast<double>(n) * std::pow(ratio, static_cast<double>(k));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x - 1e-9)));
}

std::string apply_typo(std::string_view text, Rng& rng) {
  static constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
  std::string s(text);
  const auto op = uniform_index(rng, s.size() > 1 ? 3 : 2);  // never delete the last char
  if (op == 0) {  // insert
    const auto at = uniform_index(rng, s.size() + 1);
    s.insert(s.begin() + static_cast<std::ptrdiff_t>(at), kLetters[uniform_index(rng, kLetters.size())]);
  } else if (op == 1) {  // substitute
    const auto at = uniform_index(rng, s.size());
    char c;
    do {
      c = kLetters[uniform_index(rng, kLetters.size())];
    } while (c == s[at]);
    s[at] = c;
  } else {  // delete
    const auto at = uniform_index(rng, s.size());
    s.erase(s.begin() + static_cast<std::ptrdiff_t>(at));
  }
  if (trim(s).empty()) return std::string(text);
  return s;
}

namespace {

std::string make_stem(Rng& rng) {
  static constexpr std::string_view kOnset = "bcdfghjklmnprstvz";
  static constexpr std::string_view kVowel = "aeiou";
  const std::size_t syllables = 2 + uniform_index(rng, 2);
  std::string s;
  for (std::size_t i = 0; i < syllables; ++i) {
    s += kOnset[uniform_index(rng, kOnset.size())];
    s += kVowel[uniform_index(rng, kVowel.size())];
  }
  if (bernoulli(rng, 0.5)) s += kOnset[uniform_index(rng, kOnset.size())];
  return s;
}

}  // namespace

SyntheticCorpus gen_synthetic(const SyntheticSpec& spec) {
  if (spec.parents == 0 || spec.children_per_parent == 0 || spec.queries_per_child == 0 ||
      spec.stems_per_child == 0) {
    throw Error(ErrorCode::InvalidConfig, "synthetic counts must be at least 1");
  }
  if (!(spec.imbalance > 0 && spec.imbalance <= 1) || spec.typo_rate < 0 || spec.typo_rate > 1 ||
      spec.unlabeled_fraction < 0 || spec.unlabeled_fraction > 1) {
    throw Error(ErrorCode::InvalidConfig, "imbalance must be in (0,1], probabilities in [0,1]");
  }
  Rng rng(mix_seed(spec.seed, 0x5E17));

  std::set<std::string> used;
  auto fresh_stem = [&] {
    std::string s;
    do {
      s = make_stem(rng);
    } while (!used.insert(s).second);
    return s;
  };

  // Vocabulary and taxonomy. Child names are built from the first two stems
  // of their own vocabulary, so label text carries class signal.
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::vector<std::vector<std::vector<std::string>>> vocab(spec.parents);
  for (std::size_t p = 0; p < spec.parents; ++p) {
    std::string parent_name = fresh_stem() + " group";
    std::vector<std::string> kids;
    for (std::size_t c = 0; c < spec.children_per_parent; ++c) {
      std::vector<std::string> stems;
      for (std::size_t s = 0; s < spec.stems_per_child; ++s) stems.push_back(fresh_stem());
      kids.push_back(stems.size() > 1 ? stems[0] + " " + stems[1] : stems[0]);
      vocab[p].push_back(std::move(stems));
    }
    groups.emplace_back(std::move(parent_name), std::move(kids));
  }

  SyntheticCorpus out;
  out.taxonomy = Taxonomy::from_groups(groups);

  std::size_t next_id = 0;
  auto new_id = [&] {
    char buf[16];
    std::snprintf(buf, sizeof buf, "q%06zu", ++next_id);
    return std::string(buf);
  };

  for (std::size_t p = 0; p < spec.parents; ++p) {
    for (std::size_t c = 0; c < spec.children_per_parent; ++c) {
      const LabelId child = out.taxonomy.id_of(groups[p].second[c]);
      const auto& stems = vocab[p][c];
      out.vocabulary[child] = stems;
      const std::size_t n = geometric_class_size(spec.queries_per_child, spec.imbalance, c);

      std::vector<std::string> texts(n);
      std::vector<bool> is_labeled(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t len = 2 + uniform_index(rng, 4);
        for (std::size_t w = 0; w < len; ++w) {
          if (w) texts[i] += ' ';
          texts[i] += stems[uniform_index(rng, stems.size())];
        }
        // The first query of every class stays labeled so typo'd unlabeled
        // queries always have a labeled source to derive from.
        is_labeled[i] = i == 0 || !bernoulli(rng, spec.unlabeled_fraction);
      }
      std::vector<std::size_t> labeled_idx;
      for (std::size_t i = 0; i < n; ++i) {
        if (is_labeled[i]) {
          if (bernoulli(rng, spec.typo_rate)) texts[i] = apply_typo(texts[i], rng);
          labeled_idx.push_back(i);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (!is_labeled[i] && bernoulli(rng, spec.typo_rate)) {
          const auto& source = texts[labeled_idx[uniform_index(rng, labeled_idx.size())]];
          texts[i] = apply_typo(source, rng);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        QueryRecord r{new_id(), texts[i], std::nullopt};
        if (is_labeled[i]) {
          r.child = child;
        } else {
          out.truth[r.id] = child;
        }
        out.records.push_back(std::move(r));
      }
    }
  }
  shuffle(std::span(out.records), rng);
  return out;
}

void write_truth(const std::filesystem::path& path, const std::map<std::string, LabelId>& truth,
                 const Taxonomy& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (const auto& [id, label] : truth) out << id << '\t' << t.name(label) << '\n';
}

std::map<std::string, LabelId> load_truth(const std::filesystem::path& path, const Taxonomy& t) {
  const auto text = read_file(path);
  std::map<std::string, LabelId> out;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cols = split_tabs(line);
    if (cols.size() != 2) {
      throw Error(ErrorCode::MalformedRow, "truth row " + std::to_string(row) + ": expected 2 columns");
    }
    out[std::string(trim(cols[0]))] = t.id_of(trim(cols[1]));
  }
  return out;
}

}  // namespace hiqc
