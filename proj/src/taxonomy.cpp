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

#include "hiqc/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hiqc/error.hpp"

namespace hiqc {

namespace {

struct RawNode {
  std::string name;
  int depth = 0;
  int parent = -1;  // index into the raw list, -1 for top level
  int child_count = 0;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Taxonomy Taxonomy::parse(std::string_view text) {
  std::vector<RawNode> raw;
  std::vector<int> stack;  // raw index of the open node at each depth
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') {
      if (nl == text.size()) break;
      continue;
    }
    const auto indent = line.find_first_not_of(' ');
    if (line[indent] == '\t' || indent % 2 != 0) {
      throw Error(ErrorCode::OrphanChild,
                  "line " + std::to_string(line_no) + ": indentation must be a multiple of two spaces");
    }
    const int depth = static_cast<int>(indent / 2) + 1;
    if (depth > static_cast<int>(stack.size()) + 1) {
      throw Error(ErrorCode::OrphanChild,
                  "line " + std::to_string(line_no) + ": '" + std::string(body) +
                      "' has no enclosing parent");
    }
    stack.resize(static_cast<std::size_t>(depth - 1));
    RawNode n;
    n.name = std::string(body);
    n.depth = depth;
    n.parent = stack.empty() ? -1 : stack.back();
    if (n.parent >= 0) ++raw[static_cast<std::size_t>(n.parent)].child_count;
    stack.push_back(static_cast<int>(raw.size()));
    raw.push_back(std::move(n));
    if (nl == text.size()) break;
  }

  if (raw.empty()) throw Error(ErrorCode::EmptyTaxonomy, "no labels found");

  Taxonomy t;
  {
    std::map<std::string, int, std::less<>> seen;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i].name == kRootName) {
        throw Error(ErrorCode::DuplicateLabel, "'" + raw[i].name + "' is reserved for the root");
      }
      if (!seen.emplace(raw[i].name, static_cast<int>(i)).second) {
        throw Error(ErrorCode::DuplicateLabel, "'" + raw[i].name + "' appears more than once");
      }
      if (raw[i].depth == 1 && raw[i].child_count == 0) {
        throw Error(ErrorCode::ChildlessParent, "'" + raw[i].name + "' has no children");
      }
    }
  }

  // Internal nodes first, then leaves; each group sorted by name.
  std::vector<int> internal, leaves;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    (raw[i].child_count > 0 ? internal : leaves).push_back(static_cast<int>(i));
  }
  auto by_name = [&](int a, int b) { return raw[static_cast<std::size_t>(a)].name < raw[static_cast<std::size_t>(b)].name; };
  std::sort(internal.begin(), internal.end(), by_name);
  std::sort(leaves.begin(), leaves.end(), by_name);

  std::vector<std::size_t> raw_to_id(raw.size());
  std::size_t next = 1;
  for (int r : internal) raw_to_id[static_cast<std::size_t>(r)] = next++;
  for (int r : leaves) raw_to_id[static_cast<std::size_t>(r)] = next++;

  t.nodes_.resize(raw.size() + 1);
  t.nodes_[0] = LabelNode{std::string(kRootName), LabelKind::Root, LabelId{0}, 0};
  for (std::size_t r = 0; r < raw.size(); ++r) {
    auto& n = t.nodes_[raw_to_id[r]];
    n.name = raw[r].name;
    n.kind = raw[r].child_count > 0 ? LabelKind::Parent : LabelKind::Child;
    n.depth = raw[r].depth;
    n.parent = raw[r].parent < 0 ? LabelId{0}
                                 : label_id(raw_to_id[static_cast<std::size_t>(raw[r].parent)]);
  }
  for (std::size_t i = 1; i < t.nodes_.size(); ++i) {
    const auto id = label_id(i);
    t.by_name_.emplace(t.nodes_[i].name, id);
    (t.nodes_[i].kind == LabelKind::Parent ? t.parents_ : t.children_).push_back(id);
  }
  for (LabelId c : t.children_) t.leaf_parents_.push_back(t.nodes_[idx(c)].parent);
  std::sort(t.leaf_parents_.begin(), t.leaf_parents_.end());
  t.leaf_parents_.erase(std::unique(t.leaf_parents_.begin(), t.leaf_parents_.end()),
                        t.leaf_parents_.end());

  t.rank_.assign(t.nodes_.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < t.children_.size(); ++i) t.rank_[idx(t.children_[i])] = i;
  for (std::size_t i = 0; i < t.leaf_parents_.size(); ++i) t.rank_[idx(t.leaf_parents_[i])] = i;
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open taxonomy file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

Taxonomy Taxonomy::from_groups(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& groups) {
  std::string text;
  for (const auto& [parent, kids] : groups) {
    text += parent + "\n";
    for (const auto& k : kids) text += "  " + k + "\n";
  }
  return parse(text);
}

const LabelNode& Taxonomy::node(LabelId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownLabel, "label id " + std::to_string(idx(id)));
  return nodes_[idx(id)];
}

LabelId Taxonomy::parent_of(LabelId id) const {
  const auto& n = node(id);
  if (n.kind == LabelKind::Root) throw Error(ErrorCode::UnknownLabel, "the root has no parent");
  return n.parent;
}

std::optional<LabelId> Taxonomy::find(std::string_view name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

LabelId Taxonomy::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw Error(ErrorCode::UnknownLabel, "'" + std::string(name) + "' is not in the taxonomy");
}

std::vector<LabelId> Taxonomy::siblings(LabelId child) const {
  const auto& n = node(child);
  if (n.kind != LabelKind::Child) {
    throw Error(ErrorCode::NotAChild, "'" + n.name + "' is not a child label");
  }
  std::vector<LabelId> out;
  for (LabelId c : children_) {
    if (c != child && nodes_[idx(c)].parent == n.parent) out.push_back(c);
  }
  return out;
}

std::size_t Taxonomy::child_rank(LabelId child) const {
  if (!is_child(child)) throw Error(ErrorCode::NotAChild, "label id " + std::to_string(idx(child)));
  return rank_[idx(child)];
}

std::size_t Taxonomy::leaf_parent_rank(LabelId parent) const {
  if (!std::binary_search(leaf_parents_.begin(), leaf_parents_.end(), parent)) {
    throw Error(ErrorCode::UnknownLabel,
                "label id " + std::to_string(idx(parent)) + " is not a leaf parent");
  }
  return rank_[idx(parent)];
}

std::string Taxonomy::serialize() const {
  // Depth-first in id order so the rendering is canonical.
  std::vector<std::vector<LabelId>> kids(nodes_.size());
  for (std::size_t i = 1; i < nodes_.size(); ++i) kids[idx(nodes_[i].parent)].push_back(label_id(i));
  std::string out;
  auto emit = [&](auto&& self, LabelId id) -> void {
    const auto& n = nodes_[idx(id)];
    out.append(static_cast<std::size_t>(2 * (n.depth - 1)), ' ');
    out += n.name;
    out += '\n';
    for (LabelId k : kids[idx(id)]) self(self, k);
  };
  for (LabelId top : kids[0]) emit(emit, top);
  return out;
}

std::uint64_t Taxonomy::hash() const { return fnv1a64(serialize()); }

Matrix normalized_adjacency(std::size_t n,
                            std::span<const std::pair<std::size_t, std::size_t>> edges) {
  Matrix a = Matrix::identity(n);
  for (auto [u, v] : edges) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  Vector inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d += a(i, j);
    inv_sqrt_deg[i] = 1.0 / std::sqrt(d);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) *= inv_sqrt_deg[i] * inv_sqrt_deg[j];
  }
  return a;
}

LabelGraph build_label_graph(const Taxonomy& t) {
  LabelGraph g;
  g.node_order.reserve(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) g.node_order.push_back(label_id(i));
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 1; i < t.size(); ++i) edges.emplace_back(idx(t.node(label_id(i)).parent), i);
  g.adjacency = normalized_adjacency(t.size(), edges);
  return g;
}

}  // namespace hiqc
