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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hiqc/matrix.hpp"

namespace hiqc {

enum class LabelId : std::uint32_t {};

constexpr std::size_t idx(LabelId id) noexcept { return static_cast<std::size_t>(id); }
constexpr LabelId label_id(std::size_t i) noexcept { return static_cast<LabelId>(i); }

enum class LabelKind { Root, Parent, Child };

struct LabelNode {
  std::string name;
  LabelKind kind = LabelKind::Child;
  LabelId parent{};  // unused for the root
  int depth = 0;     // root 0, top-level parents 1
};

/// A category tree with a synthetic root. Node ids are dense: the root is 0,
/// then every internal ("parent") node sorted by name, then every leaf
/// ("child") node sorted by name. The classifier head covers ids 1..size()-1.
class Taxonomy {
 public:
  static constexpr std::string_view kRootName = "<root>";

  /// Parses the indented text format: parents flush-left, each nesting level
  /// indented two more spaces, `#` comment lines and blank lines ignored.
  static Taxonomy parse(std::string_view text);
  static Taxonomy load(const std::filesystem::path& path);
  /// Two-level convenience constructor: (parent name, child names) pairs.
  static Taxonomy from_groups(
      const std::vector<std::pair<std::string, std::vector<std::string>>>& groups);

  std::size_t size() const noexcept { return nodes_.size(); }
  const LabelNode& node(LabelId id) const;
  const std::string& name(LabelId id) const { return node(id).name; }
  LabelId root() const noexcept { return LabelId{0}; }

  bool contains(LabelId id) const noexcept { return idx(id) < nodes_.size(); }
  bool is_child(LabelId id) const noexcept {
    return contains(id) && nodes_[idx(id)].kind == LabelKind::Child;
  }

  /// Internal non-root nodes, ascending id.
  std::span<const LabelId> parents() const noexcept { return parents_; }
  /// Leaf nodes, ascending id.
  std::span<const LabelId> children() const noexcept { return children_; }
  /// Distinct immediate parents of leaves, ascending id: the "parent level"
  /// that losses, metrics and sampling operate on.
  std::span<const LabelId> leaf_parents() const noexcept { return leaf_parents_; }

  LabelId parent_of(LabelId id) const;
  std::optional<LabelId> find(std::string_view name) const;
  /// Like find() but throws UnknownLabel.
  LabelId id_of(std::string_view name) const;

  /// Leaves sharing `child`'s parent, excluding `child` itself.
  std::vector<LabelId> siblings(LabelId child) const;

  /// Position of a label in the classifier head (root has none).
  std::size_t head_index(LabelId id) const noexcept { return idx(id) - 1; }
  std::size_t head_size() const noexcept { return nodes_.size() - 1; }

  /// Position of a leaf among children() / of a parent among leaf_parents().
  std::size_t child_rank(LabelId child) const;
  std::size_t leaf_parent_rank(LabelId parent) const;

  /// Canonical text rendering (same format parse() accepts).
  std::string serialize() const;
  /// FNV-1a 64 of serialize(); used to bind checkpoints to a taxonomy.
  std::uint64_t hash() const;

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.serialize() == b.serialize();
  }

 private:
  std::vector<LabelNode> nodes_;
  std::vector<LabelId> parents_;
  std::vector<LabelId> children_;
  std::vector<LabelId> leaf_parents_;
  std::vector<std::size_t> rank_;  // child_rank / leaf_parent_rank lookup
  std::map<std::string, LabelId, std::less<>> by_name_;
};

struct LabelGraph {
  std::vector<LabelId> node_order;
  Matrix adjacency;  // D^-1/2 (A + I) D^-1/2
};

/// Symmetric normalization of an undirected edge list with self-loops added.
Matrix normalized_adjacency(std::size_t n,
                            std::span<const std::pair<std::size_t, std::size_t>> edges);

LabelGraph build_label_graph(const Taxonomy& t);

std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 1469598103934665603ULL);

}  // namespace hiqc
